use std::path::Path;
use std::process::{Command, Output};

fn gammalind(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gammalind"))
        .args(args)
        .current_dir(dir)
        .env_remove("GAMMALIND_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CONFIG: &str = r#"
[graph]
lattice = "honeycomb"
nx = 4
ny = 4

[sector]
flux = "zero"
V = [0]

[sweep]
gamma_min = 1e-2
gamma_max = 1e2
points = 6
n = [1, 3]

[output]
csv = "gap.csv"
"#;

#[test]
fn sweep_csv_is_byte_stable_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let o = gammalind(dir.path(), &["--threads", threads, "sweep", "-c", "run.toml"]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(dir.path().join("gap.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("gamma,n,gap,bound_lower,bound_upper,vacuum_physical,pf_sign,exceptional_flag,wall_time_ms")
    );
    assert_eq!(lines.count(), 12);
    assert!(text.contains("\n0.01,1,"), "grid starts exactly at gamma_min:\n{text}");
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    let o = gammalind(dir.path(), &["sweep", "-c", "run.toml", "--points", "2", "--n", "1", "--csv", "other.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("other.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn empty_grid_is_rejected_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG.replace("points = 6", "points = 0")).unwrap();
    let o = gammalind(dir.path(), &["sweep", "-c", "run.toml"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("run.toml: line 14: the gamma grid is empty"), "{}", stderr(&o));
}

#[test]
fn corrupted_graph_file_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tri.txt"), "// triangle\n3 3\n1 0 1 1.0\n1 2 2 1.0\n2 0 three 1.0\n").unwrap();
    let o = gammalind(dir.path(), &["sector-info", "--graph", "tri.txt"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("tri.txt: line 5"), "{err}");
}

#[test]
fn sector_info_counts_fluxes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tri.txt"), "3 3\n0 1 1 1.0\n1 2 2 1.0\n2 0 3 1.0\n").unwrap();
    let o = gammalind(dir.path(), &["sector-info", "--graph", "tri.txt", "--flip-u", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("independent fluxes: 1 strong, 3 weak, 4 total"), "{out}");
    assert!(out.contains("auto mode picks Parity"), "{out}");
}

#[test]
fn auto_mode_keeps_intralayer_flips_on_the_parity_solver() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--lattice", "square", "--nx", "2", "--ny", "2", "--flip-u", "0"];
    let grid = ["--gamma-min", "0.1", "--gamma-max", "10", "--points", "3"];
    let o = gammalind(dir.path(), &[&args[..], &grid[..]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    for row in stdout(&o).lines().skip(1) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[1], "", "parity rows leave n blank: {row}");
        assert!(!cells[6].is_empty(), "parity rows carry pf_sign: {row}");
    }
    let forced = gammalind(dir.path(), &[&args[..], &grid[..], &["--mode", "number"][..]].concat());
    assert!(!forced.status.success());
    assert!(stderr(&forced).contains("empty U set"), "{}", stderr(&forced));
}

#[test]
fn plot_draws_band_and_rejects_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    assert!(gammalind(dir.path(), &["sweep", "-c", "run.toml"]).status.success());
    let o = gammalind(dir.path(), &["plot", "gap.csv", "-o", "gap.svg", "--band", "on"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(dir.path().join("gap.svg")).unwrap();
    assert!(svg.contains("<polygon") && svg.contains("gap n=3"));

    std::fs::write(dir.path().join("bad.csv"), "gamma,gapp\n1,2\n").unwrap();
    let o = gammalind(dir.path(), &["plot", "bad.csv", "-o", "bad.svg"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing column(s): gap"), "{}", stderr(&o));
}

#[test]
fn verify_fast_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = gammalind(dir.path(), &["verify", "--level", "fast"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("3 of 3 checks passed"));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            let cfg = gammalind::SweepConfig::from_toml(&text).unwrap();
            cfg.plan(&text, &dir).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 2);
}
