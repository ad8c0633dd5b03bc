use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gisc_core::dataio::{read_cube, read_matrix, write_cube, write_detector};
use gisc_core::{CubeDims, DetectorDims, DetectorImage, HsiCube};
use serde_json::Value;

fn gisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gisc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = gisc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    gisc(args).status.code().expect("exited normally")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Synthetic scene, matrix and clean measurement in `dir`.
fn pipeline(dir: &Path, dims: &str, detector: &str) -> (String, String, String) {
    let (s, m, y) = (p(dir, "scene.gsc"), p(dir, "phi.gsm"), p(dir, "y.gsd"));
    ok(&[
        "synth",
        "--cube-dims",
        dims,
        "--wavelengths",
        "560:35",
        "--seed",
        "3",
        "--out",
        &s,
    ]);
    ok(&[
        "calibrate",
        "--cube-dims",
        dims,
        "--detector",
        detector,
        "--grain",
        "2",
        "--seed",
        "4",
        "--out",
        &m,
    ]);
    ok(&[
        "sense", "--matrix", &m, "--cube", &s, "--snr-db", "inf", "--out", &y,
    ]);
    (s, m, y)
}

#[test]
fn calibrate_small_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "phi.gsm");
    ok(&[
        "calibrate",
        "--cube-dims",
        "2x2x3",
        "--detector",
        "2x2",
        "--seed",
        "9",
        "--out",
        &out,
    ]);
    let phi = read_matrix(&out).unwrap();
    assert_eq!((phi.rows(), phi.cols()), (4, 12));
    let manifest = json(format!("{out}.manifest.json"));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["outputs"]["matrix"], out.as_str());
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(manifest["command_line"].as_array().unwrap().len() > 3);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|tag| {
            let d = dir.path().join(tag);
            fs::create_dir(&d).unwrap();
            let (s, m, _) = pipeline(&d, "6x6x3", "12x12");
            let y = p(&d, "noisy.gsd");
            ok(&[
                "sense", "--matrix", &m, "--cube", &s, "--snr-db", "30", "--seed", "1", "--out", &y,
            ]);
            [s, m, y]
                .iter()
                .flat_map(|f| fs::read(f).unwrap())
                .collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (p(dir.path(), "a.gsm"), p(dir.path(), "b.gsm"));
    let args = |out: &str| {
        [
            "calibrate",
            "--cube-dims",
            "4x4x4",
            "--detector",
            "16x16",
            "--grain",
            "3",
            "--out",
            out,
        ]
        .map(String::from)
    };
    let run = |out: &str, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_gisc"))
            .args(args(out))
            .env("GISC_THREADS", threads)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
    };
    run(&a, "1");
    run(&b, "3");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let bad = Command::new(env!("CARGO_BIN_EXE_gisc"))
        .args(args(&a))
        .env("GISC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        code(&["calibrate", "--cube-dims", "2x2x3", "--detector", "2x2"]),
        2
    );
    assert_eq!(
        code(&[
            "calibrate",
            "--cube-dims",
            "2x2",
            "--detector",
            "2x2",
            "--out",
            "x"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "reconstruct",
            "--algo",
            "fista",
            "--matrix",
            "a",
            "--meas",
            "b",
            "--out",
            "c"
        ]),
        2
    );
    assert_eq!(code(&["frobnicate"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "phi.gsm");
    assert_eq!(
        code(&[
            "calibrate",
            "--cube-dims",
            "2x2x3",
            "--detector",
            "2x2",
            "--grain",
            "0.5",
            "--out",
            &out
        ]),
        2
    );
}

#[test]
fn io_and_format_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = p(dir.path(), "missing.gsm");
    let junk = p(dir.path(), "junk.gsc");
    fs::write(&junk, b"XXXXnot a cube").unwrap();
    let y = p(dir.path(), "y.gsd");
    assert_eq!(
        code(&["sense", "--matrix", &missing, "--cube", &junk, "--out", &y]),
        3
    );
    let (s, m, _) = pipeline(dir.path(), "2x2x3", "2x2");
    assert_eq!(
        code(&["sense", "--matrix", &m, "--cube", &junk, "--out", &y]),
        3
    );
    assert_eq!(
        code(&["sense", "--matrix", &s, "--cube", &s, "--out", &y]),
        3
    );
}

#[test]
fn mismatched_dims_exit_4_and_name_both() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m, _) = pipeline(dir.path(), "2x2x3", "2x2");
    let other = p(dir.path(), "other.gsc");
    ok(&["synth", "--cube-dims", "3x3x3", "--out", &other]);
    let out = gisc(&[
        "sense",
        "--matrix",
        &m,
        "--cube",
        &other,
        "--out",
        &p(dir.path(), "y2.gsd"),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("2x2x3") && msg.contains("3x3x3"), "{msg}");
}

#[test]
fn degenerate_matrix_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let dims = CubeDims::new(1, 2, 1);
    let det = DetectorDims::new(2, 1);
    let blank = gisc_core::SensingMatrix::new(
        dims,
        det,
        gisc_core::DenseMatrix::from_col_major(2, 2, vec![0.0; 4]).unwrap(),
    )
    .unwrap();
    let m = p(dir.path(), "blank.gsm");
    gisc_core::dataio::write_matrix(&m, &blank).unwrap();
    let y = p(dir.path(), "y.gsd");
    write_detector(&y, &DetectorImage::new(det, vec![1.0, 2.0]).unwrap()).unwrap();
    let out = p(dir.path(), "r.gsc");
    assert_eq!(
        code(&[
            "reconstruct",
            "--algo",
            "dgi",
            "--matrix",
            &m,
            "--meas",
            &y,
            "--out",
            &out
        ]),
        5
    );
    assert_eq!(
        code(&[
            "reconstruct",
            "--algo",
            "twist",
            "--matrix",
            &m,
            "--meas",
            &y,
            "--out",
            &out
        ]),
        5
    );
}

#[test]
fn dgi_of_zero_measurement_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m, _) = pipeline(dir.path(), "4x4x2", "8x8");
    let y = p(dir.path(), "zero.gsd");
    write_detector(
        &y,
        &DetectorImage::new(DetectorDims::new(8, 8), vec![0.0; 64]).unwrap(),
    )
    .unwrap();
    let out = p(dir.path(), "r.gsc");
    ok(&[
        "reconstruct",
        "--algo",
        "dgi",
        "--matrix",
        &m,
        "--meas",
        &y,
        "--wavelengths",
        "600,610",
        "--out",
        &out,
    ]);
    let cube = read_cube(&out).unwrap();
    assert!(cube.as_slice().iter().all(|&v| v == 0.0));
    assert_eq!(cube.wavelengths(), &[600.0, 610.0]);
    assert!(!Path::new(&format!("{out}.trace.csv")).exists());
    let bad = p(dir.path(), "bad.gsc");
    assert_eq!(
        code(&[
            "reconstruct",
            "--algo",
            "dgi",
            "--matrix",
            &m,
            "--meas",
            &y,
            "--wavelengths",
            "1,2,3",
            "--out",
            &bad
        ]),
        4
    );
}

#[test]
fn twist_trace_is_bounded_and_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let (s, m, y) = pipeline(dir.path(), "12x12x2", "24x24");
    let out = p(dir.path(), "r.gsc");
    ok(&[
        "reconstruct",
        "--algo",
        "twist",
        "--matrix",
        &m,
        "--meas",
        &y,
        "--iters",
        "500",
        "--tol",
        "1e-6",
        "--lambda",
        "0.5",
        "--regularizer",
        "tv",
        "--wavelengths",
        "560:35",
        "--out",
        &out,
    ]);
    let trace = fs::read_to_string(format!("{out}.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iteration,objective"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(!values.is_empty() && values.len() <= 500);
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
    let report = p(dir.path(), "m.json");
    ok(&["eval", "--ref", &s, "--rec", &out, "--out", &report]);
    assert!(json(&report)["psnr_db"].as_f64().unwrap() > 10.0);
}

#[test]
fn eval_perfect_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let (s, m, _) = pipeline(dir.path(), "12x12x3", "8x8");
    let report = p(dir.path(), "m.json");
    ok(&["eval", "--ref", &s, "--rec", &s, "--out", &report]);
    let v = json(&report);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["per_band_psnr", "psnr_db", "sam_rad", "ssim"]);
    assert_eq!(v["psnr_db"], "inf");
    assert_eq!(v["ssim"], 1.0);
    assert_eq!(v["sam_rad"], 0.0);
    assert_eq!(v["per_band_psnr"], serde_json::json!(["inf", "inf", "inf"]));
    assert_eq!(
        code(&["eval", "--ref", &s, "--rec", &s, "--matrix", &m, "--out", &report]),
        2
    );

    // GSD1 stores f32, so the loss is exactly zero only when y = ΦX survives
    // the round trip; dyadic entries keep every product and sum exact.
    let dims = CubeDims::new(12, 12, 2);
    let det = DetectorDims::new(4, 4);
    let phi = gisc_core::SensingMatrix::new(
        dims,
        det,
        gisc_core::DenseMatrix::from_fn(16, dims.len(), |i, j| ((i * 7 + j * 3) % 5) as f64 / 4.0),
    )
    .unwrap();
    let x = HsiCube::new(
        dims,
        vec![600.0, 650.0],
        (0..dims.len()).map(|k| (k % 9) as f64 / 8.0).collect(),
    )
    .unwrap();
    let (xf, mf, yf) = (
        p(dir.path(), "x.gsc"),
        p(dir.path(), "exact.gsm"),
        p(dir.path(), "exact.gsd"),
    );
    write_cube(&xf, &x).unwrap();
    gisc_core::dataio::write_matrix(&mf, &phi).unwrap();
    write_detector(&yf, &gisc_core::sense(&phi, &x).unwrap()).unwrap();
    ok(&[
        "eval", "--ref", &xf, "--rec", &xf, "--matrix", &mf, "--meas", &yf, "--out", &report,
    ]);
    assert_eq!(json(&report)["loss"], 0.0);
}

fn write_grid_cube(path: &Path, mx: usize, nx: usize) -> HsiCube {
    let wl = gisc_core::cube::wavelength_grid(400.0, 10.0, 31);
    let dims = CubeDims::new(mx, nx, 31);
    let cube = HsiCube::new(dims, wl, (0..dims.len()).map(|k| (k % 97) as f64).collect()).unwrap();
    write_cube(path, &cube).unwrap();
    cube
}

#[test]
fn patch_numbering_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let src: PathBuf = dir.path().join("big.gsc");
    write_grid_cube(&src, 40, 56);
    let out_dir = p(dir.path(), "patches");
    ok(&[
        "patch",
        "--cube",
        src.to_str().unwrap(),
        "--size",
        "8",
        "--stride",
        "8",
        "--bands",
        "560:700",
        "--out-dir",
        &out_dir,
    ]);
    let index = json(Path::new(&out_dir).join("index.json"));
    let entries = index["patches"].as_array().unwrap();
    assert_eq!(entries.len(), 5 * 7);
    assert_eq!(entries[0]["file"], "patch_0000.gsc");
    assert_eq!(
        (entries[8]["row"].as_u64(), entries[8]["col"].as_u64()),
        (Some(8), Some(8))
    );
    assert_eq!(index["wavelengths_nm"].as_array().unwrap().len(), 15);
    let first = read_cube(Path::new(&out_dir).join("patch_0000.gsc")).unwrap();
    assert_eq!(first.dims(), CubeDims::new(8, 8, 15));
    assert!(first.max_value() <= 1.0);
    assert!(Path::new(&out_dir).join("manifest.json").exists());

    let one = p(dir.path(), "one");
    ok(&[
        "patch",
        "--cube",
        src.to_str().unwrap(),
        "--size",
        "40",
        "--stride",
        "40",
        "--out-dir",
        &one,
    ]);
    assert_eq!(
        json(Path::new(&one).join("index.json"))["patches"]
            .as_array()
            .unwrap()
            .len(),
        1
    );
    let too_big = p(dir.path(), "big");
    assert_eq!(
        code(&[
            "patch",
            "--cube",
            src.to_str().unwrap(),
            "--size",
            "64",
            "--out-dir",
            &too_big
        ]),
        4
    );
    assert_eq!(
        code(&[
            "patch",
            "--cube",
            src.to_str().unwrap(),
            "--bands",
            "800:900",
            "--out-dir",
            &too_big
        ]),
        4
    );
}

#[test]
fn patch_reads_raw_cubes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("scene.raw");
    let header = dir.path().join("scene.hdr");
    let (rows, cols, bands) = (4usize, 6usize, 3usize);
    let mut bytes = Vec::new();
    for k in 0..rows * cols * bands {
        bytes.extend_from_slice(&((k + 1) as f32).to_le_bytes());
    }
    fs::write(&data, bytes).unwrap();
    fs::write(
        &header,
        "rows = 4\ncols = 6\nbands = 3\nwavelengths = 560:70\ninterleave = bsq\n",
    )
    .unwrap();
    let out_dir = p(dir.path(), "patches");
    ok(&[
        "patch",
        "--cube",
        data.to_str().unwrap(),
        "--header",
        header.to_str().unwrap(),
        "--size",
        "2",
        "--stride",
        "2",
        "--out-dir",
        &out_dir,
    ]);
    let index = json(Path::new(&out_dir).join("index.json"));
    assert_eq!(index["patches"].as_array().unwrap().len(), 6);
    assert_eq!(index["normalized_by"], 72.0);
}

#[test]
fn export_writes_one_pgm_per_band() {
    let dir = tempfile::tempdir().unwrap();
    let s = p(dir.path(), "s.gsc");
    ok(&[
        "synth",
        "--cube-dims",
        "4x5x3",
        "--wavelengths",
        "560,630,700",
        "--out",
        &s,
    ]);
    let out_dir = dir.path().join("bands");
    ok(&[
        "export",
        "--cube",
        &s,
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    for wl in [560, 630, 700] {
        let bytes = fs::read(out_dir.join(format!("band_{wl}nm.pgm"))).unwrap();
        assert!(bytes.starts_with(b"P5\n5 4\n255\n"));
        assert_eq!(bytes.len(), 11 + 20);
    }
    let big = p(dir.path(), "big.gsc");
    write_grid_cube(Path::new(&big), 2, 2);
    assert_eq!(
        code(&[
            "export",
            "--cube",
            &big,
            "--out-dir",
            out_dir.to_str().unwrap()
        ]),
        2
    );
}
