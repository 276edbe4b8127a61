use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use contour_mend::glyphs::{builtin_templates, classify_digit, crop_to_ink, parse_templates, zone_features};
use contour_mend::harness::{corpus_map, merge_metrics, score_map, CorpusParams, ManifestEntry, MapResult, Polyline};
use contour_mend::matcher::match_endpoints;
use contour_mend::pipeline::{self, PathReport};
use contour_mend::pnm::{read_pbm, read_pgm, write_pbm, write_pgm};
use contour_mend::preprocess::{histogram, median_filter_passes, spread_midpoint, threshold};
use contour_mend::reconnect::{apply_reconnection, bridge_pairs};
use contour_mend::skeleton::{detect_endpoints, label_components, remove_crossed_points, zhang_suen_thin};
use contour_mend::{
    matcher, BinaryImage, Endpoint, GrayImage, MatchOutcome, PipelineConfig, ThresholdMode,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, Overrides};
use crate::error::CliError;
use crate::{Cli, Command, CorpusArgs};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let layers = config::load(cli.settings.config.as_deref())?.then(cli.settings.overrides());
    let cfg = layers.apply(PipelineConfig::default());
    match &cli.command {
        Command::Pipeline { input, output, report, overlay, stages_dir, ascii } => {
            let img = load_pgm(input)?;
            let out = pipeline::run(&img, &cfg)?;
            write_file(output, &write_pbm(&out.reconstructed, *ascii))?;
            if layers.dump_stages.unwrap_or(false) {
                let dir = stages_dir.clone().unwrap_or_else(|| parent_dir(output));
                fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
                let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                for (i, (name, stage)) in out.stages().iter().enumerate() {
                    write_file(&dir.join(format!("{stem}.{:02}-{name}.pbm", i + 1)), &write_pbm(stage, *ascii))?;
                }
            }
            if let Some(path) = overlay {
                write_file(path, &write_pgm(&pipeline::overlay(&out), *ascii))?;
            }
            if !out.report.all_matched {
                eprintln!("contour-mend: {} endpoints left unmatched", out.report.unmatched.len());
            }
            emit_json(&out.report, report.as_deref())
        }
        Command::Threshold { input, output, median, ascii } => {
            let img = load_pgm(input)?;
            let (value, spread) = match cfg.threshold {
                ThresholdMode::Fixed(m) => (m, None),
                ThresholdMode::Auto => {
                    let rep = spread_midpoint(&histogram(&img)).expect("images are never empty");
                    (rep.midpoint, Some(rep))
                }
            };
            let mut bin = threshold(&img, value);
            if *median {
                cfg.validate()?;
                bin = median_filter_passes(&bin, cfg.median_passes);
            }
            write_file(output, &write_pbm(&bin, *ascii))?;
            emit_json(
                &pipeline::ThresholdUsed { mode: cfg.threshold.to_string(), value, spread },
                None,
            )
        }
        Command::Thin { input, output, keep_crossings, ascii } => {
            let img = load_pbm(input)?;
            let thinned = zhang_suen_thin(&img);
            let (skel, crossed) = if *keep_crossings { (thinned, Vec::new()) } else { remove_crossed_points(&thinned) };
            write_file(output, &write_pbm(&skel, *ascii))?;
            emit_json(
                &ThinSummary { ink_before: img.count_ink(), ink_after: skel.count_ink(), crossed_points: crossed.len() },
                None,
            )
        }
        Command::Endpoints { input, output } => {
            let skel = load_pbm(input)?;
            emit_json(&describe(&skel), output.as_deref())
        }
        Command::Match { input, output } => {
            let endpoints: Vec<Endpoint> = load_json(input)?;
            let outcome = match_endpoints(&endpoints, &cfg.match_config())?;
            emit_json(&outcome, output.as_deref())
        }
        Command::Reconnect { skeleton, matches, output, paths, ascii } => {
            cfg.validate()?;
            let skel = load_pbm(skeleton)?;
            let outcome: MatchOutcome = load_json(matches)?;
            let (bridges, rejected) = bridge_pairs(&skel, &outcome.pairs, cfg.tail_k, cfg.sample_step)?;
            let joined = apply_reconnection(&skel, &bridges)?;
            write_file(output, &write_pbm(&joined, *ascii))?;
            if !rejected.is_empty() {
                eprintln!("contour-mend: {} bridges left the image and were skipped", rejected.len());
            }
            let listed: Vec<PathReport> = bridges
                .iter()
                .map(|p| PathReport {
                    a: p.pair.a.pos,
                    b: p.pair.b.pos,
                    pixel_count: p.pixels.len(),
                    samples: cfg.dump_paths.then(|| p.samples.clone()),
                    pixels: cfg.dump_paths.then(|| p.pixels.clone()),
                })
                .collect();
            emit_json(&listed, paths.as_deref())
        }
        Command::Glyph { input, templates } => {
            let img = load_pbm(input)?;
            let set = match templates {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                    parse_templates(&text).map_err(|e| CliError::bad_file(path, e))?
                }
                None => builtin_templates(),
            };
            let glyph = crop_to_ink(&img).ok_or_else(|| CliError::bad_file(input, "glyph has no ink"))?;
            let profile = zone_features(&glyph)?;
            let (digit, score) = classify_digit(&profile, &set)?;
            emit_json(&GlyphResult { digit, score, counts: profile.counts, normalized: profile.normalized }, None)
        }
        Command::Synth { out, corpus } => synth(out, &corpus_params(corpus)),
        Command::Eval { manifest, per_map } => eval(manifest, per_map.as_deref(), &layers),
    }
}

#[derive(Serialize)]
struct ThinSummary {
    ink_before: usize,
    ink_after: usize,
    crossed_points: usize,
}

#[derive(Serialize)]
struct GlyphResult {
    digit: u8,
    score: f64,
    counts: [f64; 9],
    normalized: [f64; 9],
}

fn describe(skel: &BinaryImage) -> Vec<Endpoint> {
    matcher::describe_endpoints(skel, &detect_endpoints(skel), &label_components(skel))
}

fn corpus_params(args: &CorpusArgs) -> CorpusParams {
    let d = CorpusParams::default();
    CorpusParams {
        size: args.size.unwrap_or(d.size),
        first_seed: args.seed.unwrap_or(d.first_seed),
        n_maps: args.maps.unwrap_or(d.n_maps),
        min_contours: args.min_contours.unwrap_or(d.min_contours),
        max_contours: args.max_contours.unwrap_or(d.max_contours),
        gaps_per_map: args.gaps.unwrap_or(d.gaps_per_map),
        min_gap_len: args.min_gap_len.unwrap_or(d.min_gap_len),
        max_gap_len: args.max_gap_len.unwrap_or(d.max_gap_len),
        noise_density: args.noise.unwrap_or(d.noise_density),
        stroke_radius: args.stroke_radius.unwrap_or(d.stroke_radius),
    }
}

/// Writes each map's clean and broken PGMs, its truth curves, and one
/// manifest line per map in seed order.
fn synth(dir: &Path, params: &CorpusParams) -> Result<(), CliError> {
    params.validate()?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let seeds: Vec<u64> = params.seeds().collect();
    let maps = seeds.par_iter().map(|&seed| corpus_map(seed, params)).collect::<Result<Vec<_>, _>>()?;
    let mut manifest = Vec::new();
    for m in &maps {
        let stem = format!("map-{:04}", m.seed);
        let entry = ManifestEntry {
            seed: m.seed,
            params: m.params,
            gap_len: m.gap_len,
            image: format!("{stem}.pgm"),
            broken: format!("{stem}-broken.pgm"),
            truth: format!("{stem}-truth.json"),
            records: m.records.clone(),
        };
        write_file(&dir.join(&entry.image), &write_pgm(&m.map.image, false))?;
        write_file(&dir.join(&entry.broken), &write_pgm(&m.broken, false))?;
        write_file(&dir.join(&entry.truth), &to_json(&m.map.truth_curves))?;
        manifest.extend(serde_json::to_vec(&entry).expect("manifest entries serialize"));
        manifest.push(b'\n');
    }
    write_file(&dir.join("manifest.jsonl"), &manifest)?;
    eprintln!("contour-mend: wrote {} maps to {}", maps.len(), dir.display());
    Ok(())
}

/// Scores every manifest map in parallel and merges in manifest order.
/// Without an explicit max_gap the search radius is twice the longest gap
/// in the corpus.
fn eval(manifest: &Path, per_map: Option<&Path>, layers: &Overrides) -> Result<(), CliError> {
    let text = fs::read_to_string(manifest).map_err(|e| CliError::io(manifest, e))?;
    let entries = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str::<ManifestEntry>(l)
                .map_err(|e| CliError::Malformed(format!("{}:{}: {e}", manifest.display(), n + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let longest = entries.iter().map(|e| e.gap_len).max().unwrap_or(0);
    let mut cfg = layers.apply(PipelineConfig::default());
    if layers.max_gap.is_none() && longest > 0 {
        cfg.max_gap = 2.0 * longest as f64;
    }
    cfg.validate()?;
    let base = parent_dir(manifest);
    let results = entries
        .par_iter()
        .map(|e| -> Result<MapResult, CliError> {
            let broken = load_pgm(&base.join(&e.broken))?;
            let truth: Vec<Polyline> = load_json(&base.join(&e.truth))?;
            Ok(score_map(e.seed, &broken, &e.records, &truth, &cfg)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = per_map {
        let mut lines = Vec::new();
        for r in &results {
            lines.extend(serde_json::to_vec(r).expect("results serialize"));
            lines.push(b'\n');
        }
        write_file(path, &lines)?;
    }
    let merged = merge_metrics(&results.iter().map(|r| r.metrics).collect::<Vec<_>>());
    emit_json(&merged, None)
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn load_pgm(path: &Path) -> Result<GrayImage, CliError> {
    read_pgm(&read_file(path)?).map_err(|e| CliError::bad_file(path, e))
}

fn load_pbm(path: &Path) -> Result<BinaryImage, CliError> {
    read_pbm(&read_file(path)?).map_err(|e| CliError::bad_file(path, e))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(&read_file(path)?).map_err(|e| CliError::bad_file(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let bytes = to_json(value);
    match path {
        Some(p) => write_file(p, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}
