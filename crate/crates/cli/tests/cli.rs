use std::fs;
use std::process::{Command, Output};

fn svgmres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svgmres"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn identity_preset_single_cycle() {
    let o = svgmres(&["--preset", "identity"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<_> = out.lines().collect();
    assert_eq!(
        rows[0],
        "experiment,variant,m,k,cycle,paper_mvp,true_mvp,relres,errnorm,status"
    );
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("identity,plain,5,0,1,"));
    assert!(rows[1].contains(",0.0000000000000000e0,"));
}

#[test]
fn writes_csv_file_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&p1, &p2] {
        let o = svgmres(&["--preset", "example4", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = fs::read(&p1).unwrap();
    assert_eq!(a, fs::read(&p2).unwrap());
    let text = String::from_utf8(a).unwrap();
    let sv_rows = text
        .lines()
        .filter(|l| l.starts_with("example4,sv,"))
        .count();
    assert!(sv_rows <= 18, "{sv_rows}");
    assert!(text.lines().filter(|l| l.ends_with(",converged")).count() == 4);
}

#[test]
fn matrix_market_input() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("a.mtx");
    fs::write(
        &mtx,
        "%%MatrixMarket matrix coordinate real general\n3 3 4\n1 1 2\n2 2 3\n3 3 4\n1 3 1\n",
    )
    .unwrap();
    let o = svgmres(&[
        "--matrix",
        mtx.to_str().unwrap(),
        "--variant",
        "plain",
        "--m",
        "3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    assert!(last.ends_with(",converged"), "{last}");
}

#[test]
fn missing_file_exit_one_names_path() {
    let o = svgmres(&["--matrix", "/no/such/matrix.mtx"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/matrix.mtx"));
}

#[test]
fn bad_configuration_exit_one() {
    let o = svgmres(&[
        "--matrix",
        "gen:laplacian1d:50",
        "--variant",
        "sv",
        "--m",
        "4",
        "--k",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = svgmres(&["--preset", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn strict_non_convergence_exit_two() {
    let args = [
        "--matrix",
        "gen:laplacian1d:1000",
        "--rhs",
        "e1en",
        "--variant",
        "plain",
        "--max-cycles",
        "3",
    ];
    let o = svgmres(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o)
        .lines()
        .last()
        .unwrap()
        .ends_with(",not_converged"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(svgmres(&strict).status.code(), Some(2));
}

#[test]
fn run_subcommand_matches_default() {
    let a = svgmres(&[
        "--matrix",
        "gen:bidiag:200:0.1",
        "--variant",
        "sv",
        "--m",
        "10",
        "--k",
        "2",
    ]);
    let b = svgmres(&[
        "run",
        "--matrix",
        "gen:bidiag:200:0.1",
        "--variant",
        "sv",
        "--m",
        "10",
        "--k",
        "2",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lemma_check_scalar_and_default() {
    for n in ["1", "30"] {
        let o = svgmres(&["lemma-check", "--seed", "5", "--n", n, "--trials", "20"]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert_eq!(
            out.lines().filter(|l| l.starts_with("pass ")).count(),
            3,
            "{out}"
        );
    }
    assert_eq!(
        svgmres(&["lemma-check", "--n", "101"]).status.code(),
        Some(1)
    );
}
