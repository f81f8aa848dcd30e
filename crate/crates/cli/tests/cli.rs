use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starode"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let body = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, body)
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn zero_generator_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--f", "0", "--M", "16"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let l = report(dir.path())["L"].as_u64().unwrap() as usize;

    let (header, body) = rows(&dir.path().join("coeffs.csv"));
    assert_eq!(header, ["k", "abs_u", "abs_u_oracle", "abs_diff"]);
    assert_eq!(body.len(), 16);
    assert_eq!(body[0][0], "0");
    let u0: f64 = body[0][1].parse().unwrap();
    assert!((u0 - 2f64.sqrt()).abs() <= 1e-15);
    for row in &body[..=l] {
        assert!(row[3].parse::<f64>().unwrap() <= 1e-14);
    }

    let (header, body) = rows(&dir.path().join("error.csv"));
    assert_eq!(header, ["n", "inf_err"]);
    assert_eq!(body.len(), l + 1);
}

#[test]
fn outputs_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(run(&["solve", "--f", "exp(t)*i", "--M", "48"], dir.path()).status.success());
    }
    for name in ["coeffs.csv", "error.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn floats_carry_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["solve", "--f", "1", "--M", "8"], dir.path()).status.success());
    let (_, body) = rows(&dir.path().join("coeffs.csv"));
    let mantissa = body[0][1].split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let parse = run(&["solve", "--f", "cos(4 t)", "--M", "10"], dir.path());
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("byte 6"));

    let unknown = run(&["solve", "--f", "x + 1", "--M", "10"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));

    let solver = run(&["solve", "--f", "1/(t-t)", "--M", "10"], dir.path());
    assert_eq!(solver.status.code(), Some(3));

    let small = run(&["solve", "--f", "t", "--M", "1"], dir.path());
    assert_eq!(small.status.code(), Some(3));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"").unwrap();
    let io = run(&["solve", "--f", "t", "--M", "10"], &blocker.join("sub"));
    assert_eq!(io.status.code(), Some(4));
}

#[test]
fn matrix_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["matrix", "--f", "cos(4*t)", "--M", "101"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("U trailing bandwidth = 29"), "{stdout}");

    let (header, body) = rows(&dir.path().join("sparsity_F.csv"));
    assert_eq!(header, ["i", "j"]);
    let band = body
        .iter()
        .map(|r| r[0].parse::<usize>().unwrap().abs_diff(r[1].parse().unwrap()))
        .max()
        .unwrap();
    assert!(band <= 23);

    let z = tempfile::tempdir().unwrap();
    assert!(run(&["matrix", "--f", "0", "--M", "12"], z.path()).status.success());
    let (_, u) = rows(&z.path().join("sparsity_U.csv"));
    let h: Vec<(usize, usize)> = u
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert!(h.iter().all(|&(i, j)| i.abs_diff(j) <= 1));
    assert!(h.contains(&(0, 0)) && h.contains(&(1, 0)) && h.contains(&(0, 1)));
}

#[test]
fn basis_command() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["basis", "--d", "0", "--M", "3"];
    assert!(run(&args, dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("basis_d0_M3.csv")).unwrap();
    let grid: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(grid.len(), 3);
    assert!((grid[0][0] - 0.5f64.sqrt()).abs() <= 1e-16);
    assert_eq!(grid[2][0], 0.0);

    assert!(run(&["basis", "--d", "1", "--M", "8"], dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("basis_d1_M8.csv")).unwrap();
    for (k, line) in text.lines().enumerate() {
        for (l, v) in line.split(',').enumerate() {
            if k.abs_diff(l) > 2 {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn help_documents_grammar_and_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_starode"))
        .args(["solve", "--help"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["expr    :=", "sqrt", "1e-15", "2.2204e-16", "1000", "STARODE_THREADS"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let f = "-2*pi*i*(0.1+cos(6*pi*(t+1)))";
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let out = Command::new(env!("CARGO_BIN_EXE_starode"))
            .args(["solve", "--f", f, "--M", "200", "--out"])
            .arg(dir.path())
            .env("STARODE_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(a.path().join("coeffs.csv")).unwrap(),
        std::fs::read(b.path().join("coeffs.csv")).unwrap()
    );
}
