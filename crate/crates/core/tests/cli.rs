use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dvfit::report::{ReportBody, ReportDocument};
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn dvfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dvfit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_json(dir: &TempDir, args: &[&str]) -> (Output, ReportDocument) {
    let path = dir.path().join("report.json");
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.extend(["--json", &p]);
    let out = dvfit(&all);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = ReportDocument::from_json(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", text);
    (out, doc)
}

#[test]
fn estimate_both_on_table1() {
    let dir = TempDir::new().unwrap();
    let table = data("table1.csv");
    let (out, doc) = with_json(
        &dir,
        &[
            "estimate",
            "--table",
            table.to_str().unwrap(),
            "--model",
            "binomial(n=10,p=?)",
            "--keep",
            "2,3,4,5",
        ],
    );
    let ReportBody::Estimation {
        reports, credible, ..
    } = &doc.body
    else {
        panic!("{:?}", doc.body)
    };
    assert!((reports[0].estimate[0] - 0.299).abs() < 5e-4);
    assert!((reports[1].estimate[0] - 0.300).abs() < 5e-4);
    assert_eq!(*credible, Some(true));
    assert_eq!(doc.schema_version, 1);
    assert!(doc.command.iter().any(|a| a == "--keep"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("agreement gap"));
}

#[test]
fn estimate_hartley_and_gamma() {
    let dir = TempDir::new().unwrap();
    for (file, model, a, b) in [
        ("table9.csv", "poisson(lambda=?)", 3.8447, 3.1149),
        ("table5.csv", "gamma(a=7,b=?)", 3.018, 3.054),
    ] {
        let t = data(file);
        let (_, doc) = with_json(
            &dir,
            &["estimate", "--table", t.to_str().unwrap(), "--model", model],
        );
        let ReportBody::Estimation { reports, .. } = &doc.body else {
            panic!()
        };
        assert!((reports[0].estimate[0] - a).abs() < 1e-3, "{file}");
        assert!((reports[1].estimate[0] - b).abs() < 1e-3, "{file}");
        let gap = doc.agreement_gap.unwrap()[0];
        assert!((gap - (reports[0].estimate[0] - reports[1].estimate[0]).abs()).abs() < 1e-15);
    }
}

#[test]
fn digest_follows_input_bytes() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "point,count\n2,26\n3,16\n4,18\n").unwrap();
    std::fs::write(&b, "point,count\n2,26\n3,16\n4,18\n# same numbers\n").unwrap();
    let run = |p: &Path| {
        with_json(
            &dir,
            &[
                "estimate",
                "--table",
                p.to_str().unwrap(),
                "--model",
                "poisson(lambda=?)",
            ],
        )
        .1
    };
    let (da, da2, db) = (run(&a), run(&a), run(&b));
    assert_eq!(da.input_digest, da2.input_digest);
    assert_ne!(da.input_digest, db.input_digest);
    assert_eq!(da.body, db.body);
}

#[test]
fn exit_codes() {
    let t9 = data("table9.csv");
    let t9 = t9.to_str().unwrap();
    let out = dvfit(&[
        "estimate",
        "--table",
        "/no/such/file.csv",
        "--model",
        "poisson(lambda=?)",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = dvfit(&["estimate", "--table", t9, "--model", "poisson(mu=?)"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dvfit(&[
        "estimate",
        "--table",
        t9,
        "--model",
        "poisson(lambda=?)",
        "--keep",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // B(3,p) has no mass at 4 or above.
    let out = dvfit(&[
        "estimate",
        "--table",
        t9,
        "--model",
        "binomial(n=3,p=?)",
        "--method",
        "mindv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn allocate_reproduce_and_mixture() {
    let dir = TempDir::new().unwrap();
    let t9 = data("table9.csv");
    let (_, doc) = with_json(
        &dir,
        &[
            "allocate",
            "--table",
            t9.to_str().unwrap(),
            "--model",
            "poisson(lambda=?)",
            "--missing",
            "0,1",
        ],
    );
    let ReportBody::Allocation { allocated, .. } = &doc.body else {
        panic!()
    };
    assert!((allocated[0] - 4.29).abs() < 0.05 && (allocated[1] - 13.38).abs() < 0.05);

    let (out, doc) = with_json(&dir, &["reproduce", "T8", "hartley", "T7"]);
    assert!(doc.passed());
    assert!(String::from_utf8_lossy(&out.stdout).contains("t8: pass"));

    let s = data("mixture_sample.txt");
    let (_, doc) = with_json(
        &dir,
        &[
            "mixture-init",
            "--sample",
            s.to_str().unwrap(),
            "--sigma1",
            "1",
            "--sigma2",
            "0.8",
        ],
    );
    let ReportBody::Mixture(m) = &doc.body else {
        panic!()
    };
    assert!(m.alpha_est > 0.0 && m.alpha_est < 1.0);
    assert!(m.m1_est.m_aux < m.m2_est.m_aux);
}

#[test]
fn simulate_then_gof_and_select() {
    let dir = TempDir::new().unwrap();
    let out = dvfit(&[
        "simulate",
        "--model",
        "binomial(n=10,p=0.3)",
        "--size",
        "500",
        "--seed",
        "5",
        "--keep",
        "1,2,3,4,5,6",
    ]);
    assert!(out.status.success());
    let again = dvfit(&[
        "simulate",
        "--model",
        "binomial(n=10,p=0.3)",
        "--size",
        "500",
        "--seed",
        "5",
        "--keep",
        "1,2,3,4,5,6",
    ]);
    assert_eq!(out.stdout, again.stdout);
    let table = dir.path().join("sim.csv");
    std::fs::write(&table, &out.stdout).unwrap();
    let t = table.to_str().unwrap();

    let (_, doc) = with_json(
        &dir,
        &[
            "gof",
            "--table",
            t,
            "--model",
            "binomial(n=10,p=0.3)",
            "--replicates",
            "300",
            "--seed",
            "2",
        ],
    );
    let ReportBody::Gof(g) = &doc.body else {
        panic!()
    };
    assert!(!g.reject, "{g:?}");

    let (_, doc) = with_json(
        &dir,
        &[
            "select",
            "--table",
            t,
            "--candidates",
            "binomial(n=10,p=?);poisson(lambda=?)",
        ],
    );
    let ReportBody::Selection(s) = &doc.body else {
        panic!()
    };
    assert_eq!(s.winner, 0);
}

#[test]
fn select_experiment_from_file() {
    let dir = TempDir::new().unwrap();
    let exp = dir.path().join("exp.toml");
    std::fs::write(
        &exp,
        r#"
generator = "binomial(n=8,p=0.1)"
candidates = ["binomial(n=8,p=0.1)", "binomial(n=15,p=0.15)"]
correct = 0
replications = 200
sample_size = 100
keep = [0, 1, 2, 3]
seed = 3
"#,
    )
    .unwrap();
    let (_, doc) = with_json(&dir, &["select", "--experiment", exp.to_str().unwrap()]);
    let ReportBody::Experiment { result, .. } = &doc.body else {
        panic!()
    };
    assert_eq!(result.replications, 200);
    assert!(result.rate > 0.9);
    assert_eq!(
        dvfit(&["select", "--experiment", "no-such-preset"])
            .status
            .code(),
        Some(2)
    );
}
