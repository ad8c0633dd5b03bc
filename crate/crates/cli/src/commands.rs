use std::fs;
use std::path::Path;

use gisc_core::dataio::{
    export_band_images, extract_patches, normalize, patch_offsets, read_cube, read_detector,
    read_matrix, read_raw_cube, select_bands, write_cube, write_detector, write_matrix, PatchSpec,
};
use gisc_core::metrics::evaluate;
use gisc_core::scene::{synthetic_scene, synthetic_scene_with};
use gisc_core::{
    add_noise, calibrate, dgi, sense, twist, GiscError, LossWeights, NoiseSpec, Regularizer,
    RngSpec, SpeckleSpec, TwistConfig,
};
use serde_json::json;

use crate::manifest::{beside, suffixed, Recorder};
use crate::{
    Algo, CalibrateArgs, Command, EvalArgs, ExportArgs, PatchArgs, ReconstructArgs, RegularizerArg,
    SenseArgs, SynthArgs,
};

type Result<T> = std::result::Result<T, GiscError>;

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| GiscError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Calibrate(a) => run_calibrate(a),
        Command::Sense(a) => run_sense(a),
        Command::Reconstruct(a) => run_reconstruct(a),
        Command::Eval(a) => run_eval(a),
        Command::Patch(a) => run_patch(a),
        Command::Synth(a) => run_synth(a),
        Command::Export(a) => run_export(a),
    }
}

fn run_calibrate(a: &CalibrateArgs) -> Result<()> {
    let mut rec = Recorder::start(
        Some(a.seed),
        json!({
            "cube_dims": a.cube_dims.to_string(),
            "detector": a.detector.to_string(),
            "grain": a.grain,
            "mean_intensity": a.mean_intensity,
        }),
    );
    let spec = SpeckleSpec {
        correlation_px: a.grain,
        mean_intensity: a.mean_intensity,
        rng: RngSpec::new(a.seed, 0),
    };
    let phi = calibrate(a.cube_dims, a.detector, &spec)?;
    write_matrix(&a.out, &phi)?;
    rec.output("matrix", &a.out);
    rec.finish(&beside(&a.out))?;
    println!(
        "wrote {}x{} sensing matrix to {}",
        phi.rows(),
        phi.cols(),
        a.out.display()
    );
    Ok(())
}

fn run_sense(a: &SenseArgs) -> Result<()> {
    let mut rec = Recorder::start(Some(a.seed), json!({ "snr_db": format!("{}", a.snr_db) }));
    let phi = read_matrix(&a.matrix)?;
    let cube = read_cube(&a.cube)?;
    let clean = sense(&phi, &cube)?;
    let y = add_noise(&clean, &NoiseSpec::new(a.snr_db, RngSpec::new(a.seed, 0)))?;
    write_detector(&a.out, &y)?;
    rec.input("matrix", &a.matrix)
        .input("cube", &a.cube)
        .output("measurement", &a.out);
    rec.finish(&beside(&a.out))?;
    println!("wrote {} measurement to {}", y.dims(), a.out.display());
    Ok(())
}

fn run_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let cfg = TwistConfig {
        lambda_reg: a.lambda,
        alpha_tw: a.alpha,
        beta_tw: a.beta,
        max_iters: a.iters,
        tol: a.tol,
        regularizer: match a.regularizer {
            RegularizerArg::L1 => Regularizer::SoftThresholdL1,
            RegularizerArg::Tv => Regularizer::TvPerBand,
        },
        nonneg: a.nonneg,
    };
    let params = match a.algo {
        Algo::Dgi => json!({ "algo": "dgi" }),
        Algo::Twist => json!({ "algo": "twist", "config": cfg }),
    };
    let mut rec = Recorder::start(None, params);
    let phi = read_matrix(&a.matrix)?;
    let y = read_detector(&a.meas)?;
    let result = match a.algo {
        Algo::Dgi => dgi(&y, &phi)?,
        Algo::Twist => twist(&y, &phi, &cfg)?,
    };
    let l = phi.cube_dims().l;
    let cube = match &a.wavelengths {
        Some(w) => result.cube.with_wavelengths(w.resolve(l)?)?,
        None => result.cube,
    };
    write_cube(&a.out, &cube)?;
    rec.input("matrix", &a.matrix)
        .input("measurement", &a.meas)
        .output("cube", &a.out);
    if a.algo == Algo::Twist {
        let trace_path = suffixed(&a.out, ".trace.csv");
        let mut csv = String::from("iteration,objective\n");
        for (i, f) in result.objective_trace.iter().enumerate() {
            csv.push_str(&format!("{},{f:e}\n", i + 1));
        }
        write_text(&trace_path, &csv)?;
        rec.output("trace", &trace_path);
    }
    rec.finish(&beside(&a.out))?;
    println!(
        "{} finished after {} iteration(s) in {:.3}s; wrote {}",
        match a.algo {
            Algo::Dgi => "dgi",
            Algo::Twist => "twist",
        },
        result.iterations,
        result.wall_time_s,
        a.out.display()
    );
    Ok(())
}

fn run_eval(a: &EvalArgs) -> Result<()> {
    let (alpha, beta, gamma) = a.weights;
    let weights = LossWeights::new(alpha, beta, gamma)?;
    let mut rec = Recorder::start(None, json!({ "peak": a.peak, "weights": weights }));
    let reference = read_cube(&a.reference)?;
    let recon = read_cube(&a.rec)?;
    rec.input("reference", &a.reference)
        .input("reconstruction", &a.rec);
    let measured = match (&a.matrix, &a.meas) {
        (Some(m), Some(y)) => {
            rec.input("matrix", m).input("measurement", y);
            Some((read_matrix(m)?, read_detector(y)?))
        }
        _ => None,
    };
    let report = evaluate(
        &reference,
        &recon,
        a.peak,
        measured.as_ref().map(|(phi, y)| (y, phi)),
        &weights,
    )?;
    let text = report.to_json();
    write_text(&a.out, &(text.clone() + "\n"))?;
    rec.output("report", &a.out);
    rec.finish(&beside(&a.out))?;
    println!("{text}");
    Ok(())
}

fn run_patch(a: &PatchArgs) -> Result<()> {
    let spec = PatchSpec {
        size: a.size,
        stride: a.stride,
        band_lo_nm: a.bands.0,
        band_hi_nm: a.bands.1,
    };
    spec.validate()?;
    let mut rec = Recorder::start(None, json!({ "patch": spec }));
    let cube = match &a.header {
        Some(h) => {
            rec.input("header", h);
            read_raw_cube(&a.cube, h)?
        }
        None => read_cube(&a.cube)?,
    };
    rec.input("cube", &a.cube);
    let selected = select_bands(&cube, spec.band_lo_nm, spec.band_hi_nm)?;
    let scale = selected.max_value();
    let normalized = normalize(&selected);
    let d = normalized.dims();
    let offsets = patch_offsets(d.mx, d.nx, spec.size, spec.stride)?;
    let patches = extract_patches(&normalized, &spec)?;
    fs::create_dir_all(&a.out_dir).map_err(|source| GiscError::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    let width = patches.len().saturating_sub(1).to_string().len().max(4);
    let mut entries = Vec::with_capacity(patches.len());
    for (k, (patch, (r, c))) in patches.iter().zip(&offsets).enumerate() {
        let name = format!("patch_{k:0width$}.gsc");
        write_cube(a.out_dir.join(&name), patch)?;
        entries.push(json!({ "file": name, "row": r, "col": c }));
    }
    let index = json!({
        "source_dims": cube.dims().to_string(),
        "patch_dims": format!("{}x{}x{}", spec.size, spec.size, d.l),
        "wavelengths_nm": normalized.wavelengths(),
        "normalized_by": scale,
        "patches": entries,
    });
    let index_path = a.out_dir.join("index.json");
    write_text(
        &index_path,
        &(serde_json::to_string_pretty(&index).expect("index serializes") + "\n"),
    )?;
    rec.output("index", &index_path);
    rec.finish(&a.out_dir.join("manifest.json"))?;
    println!("wrote {} patches to {}", patches.len(), a.out_dir.display());
    Ok(())
}

fn run_synth(a: &SynthArgs) -> Result<()> {
    let mut rec = Recorder::start(
        Some(a.seed),
        json!({ "cube_dims": a.cube_dims.to_string(), "shapes": a.shapes }),
    );
    let wl = a.wavelengths.resolve(a.cube_dims.l)?;
    let rng = RngSpec::new(a.seed, 0);
    let cube = match a.shapes {
        Some(n) => synthetic_scene_with(a.cube_dims, wl, rng, n)?,
        None => synthetic_scene(a.cube_dims, wl, rng)?,
    };
    write_cube(&a.out, &cube)?;
    rec.output("cube", &a.out);
    rec.finish(&beside(&a.out))?;
    println!("wrote {} scene to {}", cube.dims(), a.out.display());
    Ok(())
}

fn run_export(a: &ExportArgs) -> Result<()> {
    let mut rec = Recorder::start(None, json!({}));
    let cube = read_cube(&a.cube)?;
    rec.input("cube", &a.cube);
    let files = export_band_images(&cube, &a.out_dir)?;
    for (b, f) in files.iter().enumerate() {
        rec.output(&format!("band_{b}"), f);
    }
    rec.finish(&a.out_dir.join("manifest.json"))?;
    println!(
        "wrote {} band images to {}",
        files.len(),
        a.out_dir.display()
    );
    Ok(())
}
