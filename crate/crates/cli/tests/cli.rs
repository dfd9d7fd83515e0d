use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use wca::io::{coreset_from_json, coreset_to_json, read_clustering, read_points, write_clustering};
use wca::{build_coreset, Clustering, CoresetConfig, NormFamily, WeightedDataSet};

fn wca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wca"))
        .args(args)
        .output()
        .expect("running wca")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_mixture(path: &Path, n: usize) {
    let mut text = String::from("x,y\n");
    for j in 0..n {
        let c = [(0.0, 0.0), (6.0, 1.0), (2.0, 7.0)][j % 3];
        let t = j as f64 * 0.7;
        text.push_str(&format!("{},{}\n", c.0 + t.sin(), c.1 + (1.3 * t).cos()));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn single_point_single_site() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    let sites = dir.path().join("s.csv");
    fs::write(&pts, "x,y\n1.5,-2\n").unwrap();
    fs::write(&sites, "x,y\n0,0\n").unwrap();
    let out = dir.path().join("out");
    let o = wca(&[
        "assign",
        "--points",
        s(&pts),
        "--sites",
        s(&sites),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = read_clustering(
        fs::File::open(out.join("clustering.csv")).unwrap(),
        Some(1),
        Some(1),
    )
    .unwrap();
    assert_eq!(c.get(0, 0), 1.0);
    assert!(out.join("certificate.json").exists());
}

#[test]
fn malformed_row_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    let sites = dir.path().join("s.csv");
    fs::write(&pts, "x,y\n0,0\n1,1\n2,two\n").unwrap();
    fs::write(&sites, "x,y\n0,0\n").unwrap();
    let o = wca(&["assign", "--points", s(&pts), "--sites", s(&sites)]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn eps_above_half_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    write_mixture(&pts, 30);
    let o = wca(&[
        "build-coreset",
        "--points",
        s(&pts),
        "--k",
        "2",
        "--eps",
        "0.6",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("eps"));
    let o = wca(&[
        "build-coreset",
        "--points",
        s(&pts),
        "--k",
        "2",
        "--eps",
        "0.5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn small_coreset_is_quick_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    write_mixture(&pts, 50);
    let out = dir.path().join("c");
    let t = std::time::Instant::now();
    let o = wca(&[
        "build-coreset",
        "--points",
        s(&pts),
        "--k",
        "3",
        "--eps",
        "0.25",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(t.elapsed().as_secs_f64() < 1.0);
    let c = coreset_from_json(&fs::read_to_string(out.join("coreset.json")).unwrap()).unwrap();
    let bound = c.log_value("size_bound").unwrap();
    assert!(c.len() as f64 <= bound);
    assert!(c.len() <= 2 * 50);
}

#[test]
fn circle_instance_cost_through_assign() {
    let dir = tempfile::tempdir().unwrap();
    let demo = dir.path().join("demo");
    let (n, r) = (10usize, 0.01f64);
    let o = wca(&[
        "sensitivity-demo",
        "--n",
        "10",
        "--r",
        "0.01",
        "--emit",
        s(&demo),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let expected = (n - 1) as f64 * r * r + (1.0 - r) * (1.0 - r);
    for j0 in [0usize, 3, 9] {
        let out = dir.path().join(format!("a{j0}"));
        let sites = demo.join(format!("sites_{j0}.csv"));
        let o = wca(&[
            "assign",
            "--points",
            s(&demo.join("points.csv")),
            "--sites",
            s(&sites),
            "--config",
            s(&demo.join("config.json")),
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let cert: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("certificate.json")).unwrap())
                .unwrap();
        let cost = cert["cost"].as_f64().unwrap();
        assert!(
            (cost - expected).abs() <= 1e-9 * expected,
            "{cost} vs {expected}"
        );
        let c = read_clustering(
            fs::File::open(out.join("clustering.csv")).unwrap(),
            Some(2),
            Some(n),
        )
        .unwrap();
        assert_eq!(c.get(1, j0), 1.0);
    }
}

#[test]
fn plot_is_byte_identical_and_points_only_without_clustering() {
    let dir = tempfile::tempdir().unwrap();
    let demo = dir.path().join("demo");
    assert!(wca(&["sensitivity-demo", "--emit", s(&demo)])
        .status
        .success());
    let a = dir.path().join("a");
    let o = wca(&[
        "assign",
        "--points",
        s(&demo.join("points.csv")),
        "--sites",
        s(&demo.join("sites_0.csv")),
        "--config",
        s(&demo.join("config.json")),
        "--diagram",
        "--out",
        s(&a),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut svgs = Vec::new();
    for name in ["one.svg", "two.svg"] {
        let p = dir.path().join(name);
        let o = wca(&[
            "plot",
            "--points",
            s(&demo.join("points.csv")),
            "--clustering",
            s(&a.join("clustering.csv")),
            "--sites",
            s(&demo.join("sites_0.csv")),
            "--diagram",
            s(&a.join("diagram.json")),
            "--out",
            s(&p),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        svgs.push(fs::read(&p).unwrap());
    }
    assert_eq!(svgs[0], svgs[1]);
    let text = String::from_utf8(svgs[0].clone()).unwrap();
    assert_eq!(text.matches("<rect x=").count(), 2);
    assert!(text.contains("<line"));

    let bare = dir.path().join("bare.svg");
    let o = wca(&[
        "plot",
        "--points",
        s(&demo.join("points.csv")),
        "--out",
        s(&bare),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&bare).unwrap();
    assert_eq!(text.matches(r#"fill="black""#).count(), 10);
    assert!(!text.contains("<path"));
}

#[test]
fn plot_rejects_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    fs::write(&pts, "x,y,z\n0,0,0\n1,1,1\n").unwrap();
    let o = wca(&[
        "plot",
        "--points",
        s(&pts),
        "--out",
        s(&dir.path().join("p.svg")),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("project"));
}

#[test]
fn clustering_file_round_trip() {
    let xi = vec![0.25, 1.0, 0.0, 1.0 / 3.0, 0.75, 0.0, 1.0, 2.0 / 3.0];
    let c = Clustering::new(2, 4, xi).unwrap();
    let mut buf = Vec::new();
    write_clustering(&mut buf, &c).unwrap();
    let back = read_clustering(&buf[..], Some(2), Some(4)).unwrap();
    assert_eq!(back.as_slice(), c.as_slice());
}

#[test]
fn points_and_coreset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    write_mixture(&pts, 60);
    let x: WeightedDataSet<f64> = read_points(fs::File::open(&pts).unwrap()).unwrap();
    let c = build_coreset(
        &x,
        3,
        0.25,
        &NormFamily::identity(3, 2),
        &CoresetConfig::default(),
    )
    .unwrap();
    let back = coreset_from_json(&coreset_to_json(&c)).unwrap();
    assert_eq!(back.points().coords(), c.points().coords());
    assert_eq!(back.points().weights(), c.points().weights());
    assert_eq!(back.delta_plus(), c.delta_plus());
    assert_eq!(back.delta_minus(), c.delta_minus());
    assert_eq!(back.eps(), c.eps());
    assert_eq!(back.delta(), c.delta());
    assert_eq!(coreset_to_json(&back), coreset_to_json(&c));
}

#[test]
fn identical_invocations_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    write_mixture(&pts, 90);
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let o = wca(&[
            "cluster",
            "--points",
            s(&pts),
            "--k",
            "3",
            "--eps",
            "0.3",
            "--seed",
            "7",
            "--balanced",
            "0.1",
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((
            fs::read(out.join("clustering.csv")).unwrap(),
            fs::read(out.join("sites.csv")).unwrap(),
        ));
        let _ = stdout(&o);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn balanced_cluster_weights_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    write_mixture(&pts, 90);
    let out = dir.path().join("o");
    let o = wca(&[
        "cluster",
        "--points",
        s(&pts),
        "--k",
        "3",
        "--eps",
        "0.3",
        "--balanced",
        "0",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let x = read_points(fs::File::open(&pts).unwrap()).unwrap();
    let c = read_clustering(
        fs::File::open(out.join("clustering.csv")).unwrap(),
        Some(3),
        Some(90),
    )
    .unwrap();
    for w in c.cluster_weights(&x) {
        assert!((w - 30.0).abs() <= 1e-9 * 30.0, "{w}");
    }
}

#[test]
fn verify_passes_on_fresh_coreset() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    write_mixture(&pts, 24);
    let c = dir.path().join("c");
    assert!(wca(&[
        "build-coreset",
        "--points",
        s(&pts),
        "--k",
        "2",
        "--eps",
        "0.3",
        "--out",
        s(&c)
    ])
    .status
    .success());
    let rep = dir.path().join("r");
    let o = wca(&[
        "verify",
        "--points",
        s(&pts),
        "--coreset",
        s(&c.join("coreset.json")),
        "--k",
        "2",
        "--trials",
        "10",
        "--out",
        s(&rep),
    ]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(rep.join("properties.json").exists());
    assert!(rep.join("properties.md").exists());
}

#[test]
fn bad_thread_count_is_an_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_wca"))
        .args(["net", "--eps", "0.5", "-d", "2"])
        .env("WCA_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("WCA_THREADS"));
}
