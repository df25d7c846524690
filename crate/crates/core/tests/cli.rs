use std::process::Command;

fn ilspbs(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ilspbs")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn analyze_example1() {
    let (code, out, _) = ilspbs(&["analyze", "--problem", "example1"]);
    assert_eq!(code, 0);
    assert!(out.contains("alpha_opt    1.170"), "{out}");
    assert!(out.contains("(0, 3.009"), "{out}");
}

#[test]
fn solve_exit_codes() {
    let (code, out, _) = ilspbs(&["solve", "--problem", "example1", "--method", "pbs", "--alpha", "opt"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("iterations   24"), "{out}");
    let (code, _, _) = ilspbs(&["solve", "--problem", "example1", "--method", "pbs", "--alpha", "3.5", "--maxit", "50"]);
    assert_eq!(code, 2);
    let (code, _, err) = ilspbs(&["solve", "--problem", "nosuch"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = ilspbs(&["solve", "--problem", "mtx:/nonexistent/file.mtx:6"]);
    assert_eq!(code, 1);
    let (code, _, _) = ilspbs(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn gmres_with_each_preconditioner() {
    for prec in ["pbs", "bs1", "bs2", "bs3", "none"] {
        let (code, out, _) = ilspbs(&["solve", "--problem", "pde:6", "--prec", prec, "--restart", "full"]);
        assert_eq!(code, 0, "{prec}: {out}");
    }
    let (code, _, _) = ilspbs(&["solve", "--problem", "example1", "--restart", "0"]);
    assert_eq!(code, 1);
}

#[test]
fn sweep_and_bench_csv() {
    let (code, out, _) = ilspbs(&["sweep", "--problem", "example1", "--alphas", "0.7,1,opt,1.8"]);
    assert_eq!(code, 0);
    assert!(out.contains("best alpha 1.170"), "{out}");
    let (code, out, _) = ilspbs(&["bench", "--example", "1", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 8);
    let (code, out, _) = ilspbs(&["bench", "--example", "3", "--n0", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("problem,method,iter,cpu_s,rel,err,converged"));
    let (code, _, err) = ilspbs(&["bench", "--example", "2"]);
    assert_eq!(code, 1);
    assert!(err.contains("--a1"));
}
