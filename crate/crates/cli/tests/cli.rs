use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mopr::io::{self, Format};
use mopr::{forward, int, nn_from_marginals_r2, stepline_from_nn, FreeParameter};

const BESSEL_REFERENCE: [(&str, &str); 11] = [
    ("--", "1"),
    ("1.7320508075688772935", "9.6666666666666666667"),
    ("8.5374989832437982487", "28.186991869918699187"),
    ("20.265386777687130909", "56.571895845674401834"),
    ("36.925214834648582674", "94.823932737801348717"),
    ("58.518554562959399225", "142.94410230778264607"),
    ("85.045955898223602580", "200.93289913274452209"),
    ("116.50767686120789662", "268.79060407933245800"),
    ("152.90385976282648737", "346.51739199614374938"),
    ("194.23459164836084172", "434.11337913848760712"),
    ("240.49992974325090503", "531.57864673346522330"),
];

fn mopr(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mopr"))
        .args(args)
        .current_dir(dir)
        .env_remove("MOPR_DIGITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_measures(dir: &Path) {
    fs::write(dir.join("mu1.csv"), "x,w\n0,1\n1,2\n3/2,1\n2,1\n5/2,3\n3,1\n").unwrap();
    fs::write(dir.join("mu2.csv"), "x,w\n4,1\n9/2,1\n5,2\n6,1\n13/2,1\n7,4\n").unwrap();
}

#[test]
fn bessel_table_reproduces_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = mopr(&["bessel", "--alpha", "0", "--nu", "0", "--rows", "10", "--digits", "20"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows.len(), 11);
    for (n, (row, (a, b))) in rows.iter().zip(BESSEL_REFERENCE).enumerate() {
        assert_eq!(row, &vec![n.to_string().as_str(), a, b], "row {n}");
    }
}

#[test]
fn digits_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mopr"))
        .args(["bessel", "--rows", "1"])
        .env("MOPR_DIGITS", "5")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(stdout(&out).contains("1.7321"), "{}", stdout(&out));
}

#[test]
fn roundtrip_reports_zero_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let out = mopr(&["roundtrip", "--seed", "11", "--max-len", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("max discrepancy: 0\n"));
}

#[test]
fn identical_marginals_are_singular_at_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    write_measures(dir.path());
    let m = mopr(&["marginal", "--measure", "mu1.csv", "--len", "4", "--out", "a.json"], dir.path());
    assert!(m.status.success(), "{}", stderr(&m));
    let out = mopr(&["inverse", "--marginal", "a.json", "--marginal", "a.json", "--max-len", "3"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("(0,0)"), "{}", stderr(&out));
}

#[test]
fn malformed_input_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "n,b,a_sq,a_decimal\n0,1,0,0\n1,2/0,3,1\n").unwrap();
    let out = mopr(&["inverse", "--marginal", "bad.csv", "--marginal", "bad.csv", "--max-len", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    fs::write(dir.path().join("s.json"), "{\"rows\": [\n  {\"n\": 0, \"beta\": \"1\"").unwrap();
    let out = mopr(&["forward", "--stepline", "s.json", "--c00", "1", "--max-len", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
}

#[test]
fn missing_free_parameter_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = mopr(&["forward", "--stepline", "s.json", "--max-len", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = mopr(&["forward", "--stepline", "s.json", "--c00", "1", "--m0", "1", "--m1", "1", "--max-len", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_depth_exits_with_range_code() {
    let dir = tempfile::tempdir().unwrap();
    for (alpha, out) in [("0", "b0.csv"), ("1", "b1.csv")] {
        let bessel = mopr(&["bessel", "--alpha", alpha, "--rows", "3", "--out", out], dir.path());
        assert!(bessel.status.success());
    }
    let out = mopr(&["inverse", "--marginal", "b0.csv", "--marginal", "b1.csv", "--max-len", "9"], dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn inverse_then_forward_files_reingest_exactly() {
    for format in ["json", "csv"] {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        write_measures(dir);
        for (i, name) in ["mu1", "mu2"].iter().enumerate() {
            let id = (i + 1).to_string();
            let m = mopr(
                &["marginal", "--measure", &format!("{name}.csv"), "--id", &id, "--len", "6", "--out", &format!("{name}_rec.{format}")],
                dir,
            );
            assert!(m.status.success(), "{}", stderr(&m));
        }
        let inv = mopr(
            &[
                "inverse", "--format", format, "--marginal", &format!("mu1_rec.{format}"),
                "--marginal", &format!("mu2_rec.{format}"), "--max-len", "5", "--out-dir", "inv",
            ],
            dir,
        );
        assert!(inv.status.success(), "{}", stderr(&inv));
        let fwd = mopr(
            &[
                "forward", "--format", format, "--stepline", &format!("inv/stepline.{format}"),
                "--m0", "10", "--m1", "59", "--max-len", "2", "--out-dir", "fwd",
            ],
            dir,
        );
        assert!(fwd.status.success(), "{}", stderr(&fwd));

        let fmt = if format == "json" { Format::Json } else { Format::Csv };
        let read = |p: &str| fs::read_to_string(dir.join(p)).unwrap();
        let m1 = io::marginal_from_str(&read(&format!("mu1_rec.{format}")), 1, fmt).unwrap();
        let m2 = io::marginal_from_str(&read(&format!("mu2_rec.{format}")), 2, fmt).unwrap();
        let grid = io::nn_grid_from_str(&read(&format!("inv/nn_grid.{format}")), fmt).unwrap();
        assert_eq!(grid, nn_from_marginals_r2(&m1, &m2, 5).unwrap());
        let level0 = io::stepline_from_str(&read(&format!("inv/stepline.{format}")), fmt).unwrap();
        assert_eq!(level0, stepline_from_nn(&grid, 5).unwrap());

        let expected = forward(&level0, &FreeParameter::exact_mu2(int(10), int(59)), 2).unwrap();
        let fgrid = io::nn_grid_from_str(&read(&format!("fwd/nn_grid.{format}")), fmt).unwrap();
        assert_eq!(fgrid, expected.grid);
        assert_eq!(fgrid, grid.truncated(2));
        let f1 = io::marginal_from_str(&read(&format!("fwd/marginal_mu1.{format}")), 1, fmt).unwrap();
        let f2 = io::marginal_from_str(&read(&format!("fwd/marginal_mu2.{format}")), 2, fmt).unwrap();
        assert_eq!(f1, m1.truncated(3));
        assert_eq!(f2, m2.truncated(3));
    }
}

#[test]
fn verify_prints_ordered_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = mopr(&["verify", "--seeds", "8", "--max-len", "3"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    for (s, line) in lines.iter().take(8).enumerate() {
        assert_eq!(*line, format!("seed {s}: PASS"));
    }
    assert!(lines[8].starts_with("verify: 8 passed, 0 failed"));
}
