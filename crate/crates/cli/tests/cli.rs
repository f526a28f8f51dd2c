use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fractal-she"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env_remove("FRACTAL_SHE_OUT")
        .env_remove("FRACTAL_SHE_THREADS")
        .output()
        .unwrap()
}

#[test]
fn verify_gasket_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", "level = 3\n[structure]\npreset = \"gasket(2)\"\n");
    let out = dir.path().join("out");
    let o = run("verify", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let c = report["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "harmonic_structure")
        .unwrap();
    assert_eq!(c["passed"], true);
    assert!(c["measured"].as_f64().unwrap() < 1e-10);
    assert!(out.join("report.csv").exists());
}

#[test]
fn spectrum_interval_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", "level = 10\nbc = \"D\"\n[structure]\npreset = \"interval(2)\"\n");
    let out = dir.path().join("out");
    let o = run("spectrum", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let lambdas: Vec<f64> = csv
        .lines()
        .skip(1)
        .take(10)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for (k, l) in lambdas.iter().enumerate() {
        let exact = ((k + 1) as f64 * std::f64::consts::PI).powi(2);
        assert!((l - exact).abs() / exact < 0.01, "k = {}: {l} vs {exact}", k + 1);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.toml",
        "level = 3\nalpha = 0.5\nreplicas = 1000\nseed = 7\n[structure]\npreset = \"gasket(2)\"\n[time]\ntimes = [0.1, 1.0]\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("simulate", &cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run("simulate", &cfg, &b, &["--threads", "1"]).status.code(), Some(0));
    for f in ["field.csv", "coefficients.csv", "moments.csv", "report.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    run("simulate", &cfg, &c, &["--seed", "8"]);
    assert_ne!(std::fs::read(a.join("field.csv")).unwrap(), std::fs::read(c.join("field.csv")).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        ("kind = \"spectrum\"\nlevel = 3\n[structure]\npreset = \"gasket(2)\"\n", "verify"),
        ("level = 3\n[structure]\npreset = \"carpet(2)\"\n", "verify"),
        ("level = 9\n[structure]\npreset = \"gasket(2)\"\n", "spectrum"),
        ("level = 3\ntruncation = 500\n[structure]\npreset = \"gasket(2)\"\n", "spectrum"),
        ("level = 3\nbogus = 1\n[structure]\npreset = \"gasket(2)\"\n", "verify"),
    ];
    for (i, (body, sub)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.toml"), body);
        let o = run(sub, &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = run("verify", &dir.path().join("missing.toml"), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_criterion_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "w.toml",
        "level = 2\n[structure]\nname = \"bad\"\nweights = [0.7, 0.7, 0.7]\n\
         a0 = [[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]]\n\
         gluing = [[1, 1, 2, 0], [1, 2, 3, 0], [2, 2, 3, 1]]\n\
         boundary_images = [[1, 0], [2, 1], [3, 2]]\n",
    );
    let o = run("verify", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL harmonic_structure"));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", "level = 2\n[structure]\npreset = \"gasket(2)\"\n");
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = run("verify", &cfg, &blocker.join("sub"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not writable"));
}

#[test]
fn environment_sets_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", "level = 2\n[structure]\npreset = \"gasket(2)\"\n");
    let env_out = dir.path().join("from_env");
    let o = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .env("FRACTAL_SHE_OUT", &env_out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_out.join("report.json").exists());
}
