//! Command-line behavior: determinism of artifacts, pipeline composability,
//! and the documented exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_escapedim"))
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let base = std::env::temp_dir().join(format!("escapedim-cli-{}", std::process::id()));
    let (d1, d2) = (base.join("a"), base.join("b"));
    for d in [&d1, &d2] {
        let status = bin()
            .args(["poles", "--M", "1", "--rho", "1", "--radius", "3000"])
            .arg("--out")
            .arg(d)
            .status()
            .unwrap();
        assert!(status.success());
        let status = bin()
            .args(["dimension", "--M", "1", "--rho", "1", "--radius", "3000"])
            .arg("--out")
            .arg(d)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["atlas.json", "atlas.csv", "dimension.json", "dimension.csv", "blocks.csv"] {
        assert_eq!(read(&d1, name), read(&d2, name), "{name} differs between runs");
    }
    std::fs::remove_dir_all(&base).ok();
}

#[test]
fn invalid_config_exits_2() {
    let out = std::env::temp_dir().join(format!("escapedim-cli-bad-{}", std::process::id()));
    let status = bin()
        .args(["construct", "--M", "0", "--rho", "1"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["construct", "--M", "1", "--rho", "-1"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn construct_routes_match_rho() {
    let out = std::env::temp_dir().join(format!("escapedim-cli-route-{}", std::process::id()));
    for (rho, kind) in [("0", "F_arcsin"), ("1", "composed_f"), ("3", "power_trick")] {
        let status = bin()
            .args(["construct", "--M", "1", "--rho", rho])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let handle = std::fs::read_to_string(out.join("handle.json")).unwrap();
        assert!(handle.contains(&format!("\"kind\":\"{kind}\"")), "{handle}");
        if rho == "3" {
            assert!(handle.contains("\"N_power\":3"));
        }
    }
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn config_file_provides_defaults_and_flags_win() {
    let out = std::env::temp_dir().join(format!("escapedim-cli-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("run.toml");
    std::fs::write(&cfg, "M = 2\nrho = 1.0\n").unwrap();
    let status = bin()
        .args(["construct", "--rho", "0"])
        .arg("--out")
        .arg(&out)
        .arg("--config")
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(status.success());
    let handle = std::fs::read_to_string(out.join("handle.json")).unwrap();
    // M from file, rho overridden by the flag
    assert!(handle.contains("\"M\":2"), "{handle}");
    assert!(handle.contains("\"kind\":\"F_arcsin\""), "{handle}");
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn dimension_pipeline_composability() {
    // dimension(poles(construct)) must equal the monolithic dimension run
    let base = std::env::temp_dir().join(format!("escapedim-cli-pipe-{}", std::process::id()));
    let (piped, mono) = (base.join("piped"), base.join("mono"));
    let args = ["--M", "1", "--rho", "1", "--radius", "3000"];
    assert!(bin().arg("construct").args(args).arg("--out").arg(&piped).status().unwrap().success());
    assert!(bin().arg("poles").args(args).arg("--out").arg(&piped).status().unwrap().success());
    assert!(bin().arg("dimension").args(args).arg("--out").arg(&piped).status().unwrap().success());
    assert!(bin().arg("dimension").args(args).arg("--out").arg(&mono).status().unwrap().success());
    assert_eq!(read(&piped, "dimension.json"), read(&mono, "dimension.json"));
    std::fs::remove_dir_all(&base).ok();
}

#[test]
fn growth_command_writes_fits() {
    let out = std::env::temp_dir().join(format!("escapedim-cli-growth-{}", std::process::id()));
    let status = bin()
        .args(["growth", "--M", "1", "--rho", "0", "--radius", "1000"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = std::fs::read_to_string(out.join("growth.json")).unwrap();
    assert!(json.contains("order_fit") && json.contains("loglog_density"));
    std::fs::remove_dir_all(&out).ok();
}
