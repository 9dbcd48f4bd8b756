use std::path::Path;
use std::process::{Command, Output};

use epicurve::synthetic::{example_config, generate, SyntheticSpec};

fn epicurve(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epicurve"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn setup(
    config_text: impl FnOnce(&SyntheticSpec) -> String,
) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_units: 24,
        ..Default::default()
    };
    generate(&spec).unwrap().write_to(dir.path()).unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(&config, config_text(&spec)).unwrap();
    (dir, config)
}

#[test]
fn select_first_names_features() {
    let (_dir, config) = setup(example_config);
    let out = epicurve(&["select"], &config);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run `features` first"));
}

#[test]
fn unknown_column_exit_code() {
    let (dir, config) =
        setup(|s| example_config(s).replace("\"left30\", \"left40\"", "\"left15\", \"left40\""));
    let out = epicurve(&["all"], &config);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("left15"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_data_exit_code() {
    let (dir, config) = setup(example_config);
    std::fs::write(
        dir.path().join("cases.csv"),
        "unit_id,date,count\nU001,2022-03-01,x\n",
    )
    .unwrap();
    let out = epicurve(&["features"], &config);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_config_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_epicurve"))
        .arg("features")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_layout_with_top_and_bottom() {
    let (dir, config) = setup(example_config);
    for stage in ["features", "fuse", "select"] {
        let out = epicurve(&[stage], &config);
        assert!(
            out.status.success(),
            "{stage}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = epicurve(&["report", "--top", "5", "--bottom", "1"], &config);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("out/report_region.txt")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Response: region (North=1, South=2)");
    assert_eq!(
        lines[1].split_whitespace().collect::<Vec<_>>(),
        ["1-feature", "CE", "SCE-drop", "2-feature", "CE", "SCE-drop"]
    );
    assert_eq!(lines.len(), 3 + 6);
    let md = std::fs::read_to_string(dir.path().join("out/report_region.md")).unwrap();
    assert!(md.contains("| 1-feature | CE | SCE-drop | 2-feature | CE | SCE-drop |"));
}
