use std::process::ExitCode;

use elastica::speckle::{exp_expand, log_compress};
use elastica::{
    add_noise, gradcheck, halm_solve, halm_solve_general, synth_image, Boundary, GridShape,
    MetricReport, NoiseSpec, ScalarField, Solution, SynthKind,
};

use crate::args::{AddNoiseArgs, GradcheckArgs, MetricsArgs, Model, NoiseType, SynthArgs};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::imageio::{self, Image};
use crate::trace;

pub const EXIT_NOT_CONVERGED: u8 = 4;
pub const GRADCHECK_LIMIT: f64 = 1e-4;

const CHANNEL_NAMES: [&str; 3] = ["r", "g", "b"];

pub fn format_metrics(m: &MetricReport) -> String {
    let psnr = if m.psnr_db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{:.2}", m.psnr_db)
    };
    format!("PSNR={psnr} SSIM={:.4}", m.ssim)
}

fn solve(cfg: &RunConfig, f: &ScalarField) -> Result<Solution, CliError> {
    Ok(match cfg.model {
        Model::Ee => halm_solve(f, &cfg.params)?,
        Model::Trv => halm_solve_general(f, &cfg.penalty()?, &cfg.params)?,
    })
}

fn solve_speckle(cfg: &RunConfig, f: &ScalarField) -> Result<(ScalarField, Solution), CliError> {
    // multiplicative noise can push dark samples below zero
    let (g, t) = log_compress(&f.map(|v| v.max(0.0)))?;
    let sol = solve(cfg, &g)?;
    Ok((exp_expand(&sol.u, &t), sol))
}

/// Runs `per_channel` on every channel, concurrently for RGB input.
fn run_channels(
    img: &Image,
    per_channel: impl Fn(&ScalarField) -> Result<(ScalarField, Solution), CliError> + Sync,
) -> Result<Vec<(ScalarField, Solution)>, CliError> {
    if !img.is_color() {
        return Ok(vec![per_channel(&img.channels[0])?]);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = img
            .channels
            .iter()
            .map(|ch| s.spawn(|| per_channel(ch)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("channel solver panicked"))
            .collect()
    })
}

pub fn denoise(cfg: &RunConfig, speckle: bool) -> Result<ExitCode, CliError> {
    let input = imageio::load(&cfg.input, cfg.boundary)?;
    let reference = match &cfg.reference {
        Some(path) => Some(imageio::load(path, cfg.boundary)?),
        None => None,
    };
    if let Some(r) = &reference {
        if r.shape() != input.shape() || r.channels.len() != input.channels.len() {
            return Err(CliError::Usage(
                "reference and input differ in size or channel count".into(),
            ));
        }
    }

    let results = if speckle {
        run_channels(&input, |f| solve_speckle(cfg, f))?
    } else {
        run_channels(&input, |f| solve(cfg, f).map(|s| (s.u.clone(), s)))?
    };
    let output = Image {
        channels: results.iter().map(|(u, _)| u.clone()).collect(),
    };
    imageio::save(&cfg.output, &output)?;

    if let Some(path) = &cfg.trace {
        if let [(_, sol)] = results.as_slice() {
            trace::write(path, &sol.trace, cfg.timing)?;
        } else {
            for ((_, sol), name) in results.iter().zip(CHANNEL_NAMES) {
                trace::write(&trace::channel_path(path, name), &sol.trace, cfg.timing)?;
            }
        }
    }

    if let Some(r) = &reference {
        let before = MetricReport::compute_channels(&input.channels, &r.channels)?;
        // score what was written, not the unquantized iterate
        let written = imageio::load(&cfg.output, cfg.boundary)?;
        let after = MetricReport::compute_channels(&written.channels, &r.channels)?;
        println!("noisy:    {}", format_metrics(&before));
        println!("denoised: {}", format_metrics(&after));
    }

    let iterations: Vec<String> = results
        .iter()
        .map(|(_, s)| s.trace.iterations().to_string())
        .collect();
    if results.iter().all(|(_, s)| s.trace.converged) {
        eprintln!("converged after {} iterations", iterations.join("/"));
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "warning: tolerance {} not reached in {} iterations; output written",
            cfg.params.tol, cfg.params.max_iter
        );
        Ok(ExitCode::from(EXIT_NOT_CONVERGED))
    }
}

pub fn add_noise_cmd(args: &AddNoiseArgs) -> Result<ExitCode, CliError> {
    if !(args.var >= 0.0 && args.var.is_finite()) {
        return Err(CliError::Usage(format!(
            "--var must be nonnegative, got {}",
            args.var
        )));
    }
    let img = imageio::load(&args.input, Boundary::Periodic)?;
    let spec = match args.kind {
        NoiseType::Gaussian => NoiseSpec::gaussian(args.var, args.seed),
        NoiseType::Speckle => NoiseSpec::speckle(args.var, args.seed),
    };
    // one stream per channel so gray and RGB share the first channel's noise
    let mut channels = Vec::with_capacity(img.channels.len());
    for (i, ch) in img.channels.iter().enumerate() {
        let spec = NoiseSpec {
            seed: args.seed.wrapping_add(i as u64),
            ..spec
        };
        channels.push(add_noise(ch, &spec)?);
    }
    imageio::save(&args.output, &Image { channels })?;
    Ok(ExitCode::SUCCESS)
}

pub fn metrics(args: &MetricsArgs) -> Result<ExitCode, CliError> {
    let reference = imageio::load(&args.reference, Boundary::Periodic)?;
    let test = imageio::load(&args.test, Boundary::Periodic)?;
    if reference.shape() != test.shape() || reference.channels.len() != test.channels.len() {
        return Err(CliError::Usage(
            "images differ in size or channel count".into(),
        ));
    }
    let m = MetricReport::compute_channels(&test.channels, &reference.channels)?;
    println!("{}", format_metrics(&m));
    Ok(ExitCode::SUCCESS)
}

pub fn parse_size(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--size: expected HxW, got `{s}`"));
    let (h, w) = match s.split_once(['x', 'X']) {
        Some((h, w)) => (h, w),
        None => (s, s),
    };
    let h = h.trim().parse().map_err(|_| bad())?;
    let w = w.trim().parse().map_err(|_| bad())?;
    Ok((h, w))
}

pub fn synth(args: &SynthArgs) -> Result<ExitCode, CliError> {
    let kind: SynthKind = args.shape.parse().map_err(CliError::Usage)?;
    let (h, w) = parse_size(&args.size)?;
    let shape = GridShape::new(h, w, Boundary::Periodic)?;
    imageio::save(&args.output, &Image::gray(synth_image(kind, shape)))?;
    Ok(ExitCode::SUCCESS)
}

pub fn gradcheck_cmd(args: &GradcheckArgs) -> Result<ExitCode, CliError> {
    if args.instances == 0 {
        return Err(CliError::Usage("--instances must be positive".into()));
    }
    let r = gradcheck::run(args.seed, args.instances);
    println!("instances={}", r.instances);
    println!("elastica max_rel_err={:.3e}", r.elastica_max_rel_err);
    println!("trv max_rel_err={:.3e}", r.trv_max_rel_err);
    if r.max_rel_err() <= GRADCHECK_LIMIT {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "gradient check failed: {:.3e} > {GRADCHECK_LIMIT:e}",
            r.max_rel_err()
        );
        Ok(ExitCode::FAILURE)
    }
}
