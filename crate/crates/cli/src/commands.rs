use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use twfpd::construct::{build_bank, verify_uep, BankConfig, FilterBank, MaskRole};
use twfpd::transform::{
    analyze_level_counted, complexity_report, synth_lp_counted, synth_standard_counted,
    ComplexityReport, Decomposition, LevelDetails, OpCounts, Signal, SynthesisMode,
};
use twfpd::{MultiIndex, Orientation, TrigPoly};

use crate::config::{parse_bank_config, BankDocument};
use crate::error::CliError;
use crate::io::{read_signal, write_signal};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub bank: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub levels: usize,
    pub mode: SynthesisMode,
    pub tol: f64,
    pub orientation: Option<Orientation>,
    /// 1-based index of a complementary mask to remove (debugging aid).
    pub drop_complementary: Option<usize>,
    pub shape: Option<Vec<usize>>,
    /// Filter tables list every index of the bounding box, zeros included.
    pub dense: bool,
}

impl Options {
    fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str, cmd: &str) -> Result<&'a Path, CliError> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Validation(format!("{cmd} requires --{flag}")))
    }

    fn load_config(&self, cmd: &str) -> Result<BankConfig, CliError> {
        let path = self.require(&self.bank, "bank", cmd)?;
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = parse_bank_config(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Ok(self.adjust(config))
    }

    fn adjust(&self, config: BankConfig) -> BankConfig {
        match self.orientation {
            Some(o) => config.with_orientation(o),
            None => config,
        }
    }

    fn build(&self, config: &BankConfig) -> Result<FilterBank, CliError> {
        let bank = build_bank(config)?;
        match self.drop_complementary {
            Some(mu) if mu == 0 || mu > bank.q_c.len() => Err(CliError::Validation(format!(
                "--drop-complementary must be in 1..={}",
                bank.q_c.len()
            ))),
            Some(mu) => Ok(bank.without_complementary(mu - 1)?),
            None => Ok(bank),
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes `value` as `<output>/<name>` when an output directory is given, else to stdout.
fn emit_json(opts: &Options, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    match &opts.output {
        Some(dir) => {
            create_dir(dir)?;
            write_json(&dir.join(name), value)
        }
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
            print_stdout(&text)
        }
    }
}

/// Prints `text` to stdout; a closed pipe is not an error.
fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn terms_json(p: &TrigPoly) -> Vec<Value> {
    p.terms()
        .map(|(k, c)| json!({ "k": k.as_slice(), "coeff": c }))
        .collect()
}

fn role_name(role: MaskRole) -> &'static str {
    match role {
        MaskRole::Lowpass => "lowpass",
        MaskRole::Directional(_) => "directional",
        MaskRole::Complementary(_) => "complementary",
    }
}

pub fn cmd_build(opts: &Options) -> Result<(), CliError> {
    let config = opts.load_config("build")?;
    let bank = opts.build(&config)?;
    let masks: Vec<Value> = bank
        .masks()
        .map(|(role, m)| json!({ "label": role.label(), "role": role_name(role), "terms": terms_json(m) }))
        .collect();
    let doc = json!({
        "config": BankDocument::from_config(&config),
        "masks": masks,
        "highpass": bank.g.iter().map(terms_json).collect::<Vec<_>>(),
        "p": bank.p.iter().map(terms_json).collect::<Vec<_>>(),
    });
    emit_json(opts, "bank.json", &doc)
}

pub fn cmd_verify(opts: &Options) -> Result<(), CliError> {
    let config = opts.load_config("verify")?;
    let bank = opts.build(&config)?;
    let r = verify_uep(&bank, opts.tol);
    let masks: Vec<Value> = bank
        .masks()
        .skip(1)
        .map(|(role, m)| json!({ "label": role.label(), "vanishing_moments": m.vanishing_moments() }))
        .collect();
    let doc = json!({
        "tight": r.tight,
        "tol": r.tol,
        "uep_max_residual": r.uep_max_residual,
        "grid_max_residual": r.grid_max_residual,
        "sos_max_residual": r.sos_max_residual,
        "masks": masks,
        "directional_vanishing_moments": r.moments.directional,
        "complementary_vanishing_moments": r.moments.complementary,
        "accuracy": r.moments.accuracy,
        "flatness": r.moments.flatness,
        "c_order": r.moments.c_order,
        "min_a_half_c": r.moments.min_a_half_c,
        "directional_exact": r.moments.directional_exact,
        "complementary_bound": r.moments.complementary_bound,
    });
    emit_json(opts, "verify.json", &doc)?;
    if r.tight {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "bank is not tight: UEP residual {:e} >= {:e}",
            r.uep_max_residual, r.tol
        )))
    }
}

/// CSV with header `k1,...,kn,coeff`, rows in lexicographic index order.
///
/// The sparse layout lists nonzero taps only; the dense one walks the whole
/// bounding box of the support.
pub fn table_csv(p: &TrigPoly, dense: bool) -> String {
    let header: Vec<String> = (1..=p.dim()).map(|i| format!("k{i}")).collect();
    let mut out = header.join(",") + ",coeff\n";
    let mut row = |k: &[i64], c: f64| {
        let idx: Vec<String> = k.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{},{c:?}\n", idx.join(",")));
    };
    match p.support_bounds() {
        Some((lo, hi)) if dense => {
            let mut k = lo.clone();
            loop {
                row(&k, p.coeff(&MultiIndex::new(&k)));
                let mut a = k.len();
                loop {
                    if a == 0 {
                        return out;
                    }
                    a -= 1;
                    if k[a] < hi[a] {
                        k[a] += 1;
                        break;
                    }
                    k[a] = lo[a];
                }
            }
        }
        _ => p.terms().for_each(|(k, c)| row(k.as_slice(), c)),
    }
    out
}

pub fn cmd_table(opts: &Options) -> Result<(), CliError> {
    let config = opts.load_config("table")?;
    let bank = opts.build(&config)?;
    let dir = opts.require(&opts.output, "output", "table")?;
    create_dir(dir)?;

    let mut entries: Vec<(String, &'static str, Option<usize>, &TrigPoly)> = Vec::new();
    for (role, m) in bank.masks() {
        let dir_index = match role {
            MaskRole::Directional(l) => Some(l),
            _ => None,
        };
        entries.push((role.label(), role_name(role), dir_index, m));
        if let MaskRole::Lowpass = role {
            for (l, g) in bank.g.iter().enumerate() {
                entries.push((format!("h{}", l + 1), "directional_highpass", Some(l), g));
            }
        }
    }

    let zero = MultiIndex::zeros(bank.dim);
    let mut index = Vec::new();
    for (label, role, dir_index, m) in entries {
        let file = format!("{label}.csv");
        let path = dir.join(&file);
        fs::write(&path, table_csv(m, opts.dense)).map_err(|e| CliError::io(&path, e))?;
        let direction = dir_index.map(|l| {
            let d = &config.directions[l];
            json!({ "index": l + 1, "xi": d.xi.as_slice(), "zeta": d.zeta.as_slice(), "m": d.m })
        });
        index.push(json!({
            "file": file,
            "label": label,
            "role": role,
            "direction": direction,
            "nonzeros": m.nnz(),
            "vanishing_moments": (role != "lowpass").then(|| m.vanishing_moments()),
            "origin": { "k": zero.as_slice(), "present": m.coeff(&zero) != 0.0, "coeff": m.coeff(&zero) },
        }));
    }
    let meta = json!({ "lambda": bank.lambda, "n": bank.dim, "tables": index });
    write_json(&dir.join("tables.json"), &meta)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub levels: usize,
    pub lambda: i64,
    pub n: usize,
    pub input_shape: Vec<usize>,
    pub bank: BankDocument,
    pub coarse: String,
    pub details: Vec<ManifestLevel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestLevel {
    pub level: usize,
    pub shape: Vec<usize>,
    pub d_d: Vec<String>,
    pub d_c: Vec<String>,
}

/// Level-by-level analysis, keeping the multiply counts of each level.
fn analyze_levels(bank: &FilterBank, x: &Signal, levels: usize) -> Result<(Decomposition, Vec<OpCounts>), CliError> {
    let lambda = bank.lambda as usize;
    let total = lambda
        .checked_pow(levels as u32 + 1)
        .ok_or_else(|| CliError::Validation("too many levels".into()))?;
    if x.shape().iter().any(|s| s % total != 0) {
        return Err(CliError::Validation(format!(
            "input shape {:?} is not divisible by lambda^(J+1) = {total}",
            x.shape()
        )));
    }
    let mut current = x.clone();
    let mut details = Vec::new();
    let mut counts = Vec::new();
    for _ in 0..=levels {
        let mut c = OpCounts::default();
        let out = analyze_level_counted(bank, &current, &mut c)?;
        details.push(LevelDetails { d_d: out.d_d, d_c: out.d_c });
        counts.push(c);
        current = out.coarse;
    }
    details.reverse();
    counts.reverse();
    let dec = Decomposition {
        levels,
        lambda: bank.lambda,
        input_shape: x.shape().to_vec(),
        coarse: current,
        details,
    };
    Ok((dec, counts))
}

/// Level-by-level synthesis, adding each level's multiply counts to `counts[j]`.
fn synthesize_levels(
    bank: &FilterBank,
    dec: &Decomposition,
    mode: SynthesisMode,
    counts: &mut [OpCounts],
) -> Result<Signal, CliError> {
    let mut current = dec.coarse.clone();
    for (level, c) in dec.details.iter().zip(counts.iter_mut()) {
        current = match mode {
            SynthesisMode::Standard => synth_standard_counted(bank, &current, &level.d_d, &level.d_c, c)?,
            SynthesisMode::Lp => synth_lp_counted(bank, &current, &level.d_c, c)?,
        };
    }
    Ok(current)
}

pub fn cmd_analyze(opts: &Options) -> Result<(), CliError> {
    let config = opts.load_config("analyze")?;
    let bank = opts.build(&config)?;
    let input = opts.require(&opts.input, "input", "analyze")?;
    let dir = opts.require(&opts.output, "output", "analyze")?;
    let x = read_signal(input)?;
    let (dec, _) = analyze_levels(&bank, &x, opts.levels)?;
    create_dir(dir)?;

    write_signal(&dir.join("coarse.tws"), &dec.coarse)?;
    let mut details = Vec::new();
    for (j, level) in dec.details.iter().enumerate() {
        let names = |kind: &str, list: &[Signal]| -> Result<Vec<String>, CliError> {
            list.iter()
                .enumerate()
                .map(|(i, s)| {
                    let name = format!("level{j}_{kind}{}.tws", i + 1);
                    write_signal(&dir.join(&name), s)?;
                    Ok(name)
                })
                .collect()
        };
        let d_d = names("q_D", &level.d_d)?;
        let d_c = names("q_C", &level.d_c)?;
        details.push(ManifestLevel {
            level: j,
            shape: level.d_c[0].shape().to_vec(),
            d_d,
            d_c,
        });
    }
    let manifest = Manifest {
        levels: dec.levels,
        lambda: dec.lambda,
        n: bank.dim,
        input_shape: dec.input_shape.clone(),
        bank: BankDocument::from_config(&config),
        coarse: "coarse.tws".into(),
        details,
    };
    write_json(&dir.join(MANIFEST_NAME), &manifest)
}

pub fn cmd_synthesize(opts: &Options) -> Result<(), CliError> {
    let input = opts.require(&opts.input, "input", "synthesize")?;
    let output = opts.require(&opts.output, "output", "synthesize")?;
    let manifest_path = if input.is_dir() {
        input.join(MANIFEST_NAME)
    } else {
        input.to_path_buf()
    };
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(&manifest_path).map_err(|e| CliError::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", manifest_path.display())))?;

    let config = match &opts.bank {
        Some(_) => opts.load_config("synthesize")?,
        None => opts.adjust(manifest.bank.to_config()?),
    };
    let bank = opts.build(&config)?;
    if manifest.details.len() != manifest.levels + 1 {
        return Err(CliError::Validation(format!(
            "manifest lists {} detail levels, expected {}",
            manifest.details.len(),
            manifest.levels + 1
        )));
    }
    let load = |name: &String| read_signal(&base.join(name));
    let details = manifest
        .details
        .iter()
        .map(|l| {
            Ok(LevelDetails {
                d_d: l.d_d.iter().map(load).collect::<Result<_, CliError>>()?,
                d_c: l.d_c.iter().map(load).collect::<Result<_, CliError>>()?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let dec = Decomposition {
        levels: manifest.levels,
        lambda: manifest.lambda,
        input_shape: manifest.input_shape.clone(),
        coarse: load(&manifest.coarse)?,
        details,
    };
    let mut counts = vec![OpCounts::default(); dec.details.len()];
    let x = synthesize_levels(&bank, &dec, opts.mode, &mut counts)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_signal(output, &x)
}

fn counts_json(c: &OpCounts) -> Value {
    json!({
        "analysis_lowpass": c.analysis_lowpass,
        "analysis_directional": c.analysis_directional,
        "analysis_residual": c.analysis_residual,
        "synthesis_lowpass": c.synthesis_lowpass,
        "synthesis_directional": c.synthesis_directional,
        "synthesis_complementary": c.synthesis_complementary,
        "total": c.total(),
    })
}

fn mode_name(mode: SynthesisMode) -> &'static str {
    match mode {
        SynthesisMode::Standard => "standard",
        SynthesisMode::Lp => "lp",
    }
}

pub fn cmd_roundtrip(opts: &Options) -> Result<(), CliError> {
    let config = opts.load_config("roundtrip")?;
    let bank = opts.build(&config)?;
    let input = opts.require(&opts.input, "input", "roundtrip")?;
    let x = read_signal(input)?;

    let t0 = Instant::now();
    let (dec, mut counts) = analyze_levels(&bank, &x, opts.levels)?;
    let t1 = Instant::now();
    let y = synthesize_levels(&bank, &dec, opts.mode, &mut counts)?;
    let t2 = Instant::now();

    let max_abs = y.max_abs_diff(&x)?;
    let rms = y.rms_diff(&x)?;
    let report = complexity_report(&bank, x.shape())?;
    let per_level: Vec<Value> = counts
        .iter()
        .zip(&dec.details)
        .enumerate()
        .map(|(j, (c, level))| {
            let len: usize = level.d_c[0].len() * (bank.lambda as usize).pow(bank.dim as u32);
            json!({
                "level": j,
                "input_len": len,
                "multiplies": counts_json(c),
                "per_point": c.total() as f64 / len as f64,
            })
        })
        .collect();
    let max_cycle = counts
        .iter()
        .zip(&dec.details)
        .map(|(c, level)| c.total() as f64 / (level.d_c[0].len() * (bank.lambda as usize).pow(bank.dim as u32)) as f64)
        .fold(0.0, f64::max);
    let total: u64 = counts.iter().map(OpCounts::total).sum();
    let predicted = match opts.mode {
        SynthesisMode::Standard => report.predicted_standard,
        SynthesisMode::Lp => report.predicted_lp,
    };
    let metrics = json!({
        "shape": x.shape(),
        "levels": opts.levels,
        "mode": mode_name(opts.mode),
        "max_abs_error": max_abs,
        "rms_error": rms,
        "tol": opts.tol,
        "multiplies_total": total,
        "multiplies_per_point_total": total as f64 / x.len() as f64,
        "cycle_per_point_max": max_cycle,
        "predicted_constant": predicted,
        "predicted_lp_constant": report.predicted_lp,
        "predicted_standard_constant": report.predicted_standard,
        "within_predicted": max_cycle <= predicted,
        "per_level": per_level,
        "counts_note": "multiplications only; additions are not counted",
    });
    let timings = json!({
        "analysis_seconds": (t1 - t0).as_secs_f64(),
        "synthesis_seconds": (t2 - t1).as_secs_f64(),
    });
    match &opts.output {
        Some(dir) => {
            create_dir(dir)?;
            write_json(&dir.join("metrics.json"), &metrics)?;
            write_json(&dir.join("timings.json"), &timings)?;
        }
        None => {
            let mut both = metrics.clone();
            both["timings"] = timings;
            print_stdout(&serde_json::to_string_pretty(&both).map_err(|e| CliError::Io(e.to_string()))?)?;
        }
    }
    if max_abs < opts.tol {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "reconstruction error {max_abs:e} exceeds tolerance {:e}",
            opts.tol
        )))
    }
}

/// Largest power of `lambda` not above `cap`.
fn default_side(lambda: usize, cap: usize) -> usize {
    let mut s = lambda;
    while s * lambda <= cap {
        s *= lambda;
    }
    s
}

pub fn complexity_json(r: &ComplexityReport) -> Value {
    json!({
        "alpha": r.alpha,
        "beta": r.beta,
        "beta_star": r.beta_star,
        "lambda": r.lambda,
        "n": r.dim,
        "signal_len": r.signal_len,
        "lp_cycle": counts_json(&r.lp_cycle),
        "standard_cycle": counts_json(&r.standard_cycle),
        "lp_itemized": counts_json(&r.lp_itemized),
        "standard_itemized": counts_json(&r.standard_itemized),
        "itemized_match": r.itemized_match(),
        "lp_per_point": r.lp_per_point(),
        "standard_per_point": r.standard_per_point(),
        "predicted_lp": r.predicted_lp,
        "predicted_standard": r.predicted_standard,
        "counts_note": "multiplications only; additions are not counted",
    })
}

pub fn cmd_complexity(opts: &Options) -> Result<(), CliError> {
    let config = opts.load_config("complexity")?;
    let bank = opts.build(&config)?;
    let shape = match (&opts.shape, &opts.input) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => read_signal(path)?.shape().to_vec(),
        (None, None) => {
            let cap = if bank.dim <= 2 { 256 } else { 32 };
            vec![default_side(bank.lambda as usize, cap); bank.dim]
        }
    };
    if shape.len() != bank.dim {
        return Err(CliError::Validation(format!(
            "shape {shape:?} does not have {} entries",
            bank.dim
        )));
    }
    let report = complexity_report(&bank, &shape)?;
    emit_json(opts, "complexity.json", &complexity_json(&report))
}
