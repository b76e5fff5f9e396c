//! Measure interchange: JSON, a line-oriented text form and CSV atom lists.
//!
//! Text form, one directive per line, `#` starts a comment:
//!
//! ```text
//! tier symbolic
//! atom 3/10+1/200*tau_1^1 1/2
//! density 0 1 0.5
//! ```

use std::path::Path;

use clap::ValueEnum;

use super::io::{read_file, write_file};
use super::CliError;
use crate::numkit::rational::{format_rational, parse_rational};
use crate::numkit::{Assignment, Tier};
use crate::specmeasure::{Atom, Coincidence, Measure, Piece, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

impl Format {
    pub fn detect(path: &Path) -> Result<Format, CliError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some("txt" | "msr" | "measure") => Ok(Format::Text),
            _ => Err(CliError::Usage(format!("cannot infer the format of {}; pass --from/--to", path.display()))),
        }
    }
}

fn at(line: usize, col: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("line {line}, column {col}: {msg}"))
}

/// Column (1-based) of the `k`-th whitespace-separated token of `line`.
fn token_column(line: &str, k: usize) -> usize {
    let mut seen = 0;
    let mut in_token = false;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            in_token = false;
        } else if !in_token {
            if seen == k {
                return line[..i].chars().count() + 1;
            }
            seen += 1;
            in_token = true;
        }
    }
    line.chars().count() + 1
}

pub fn parse_text(text: &str, default_tier: Tier) -> Result<Measure, CliError> {
    let mut tier = default_tier;
    let mut tier_fixed = false;
    let mut atoms = Vec::new();
    let mut density = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(&head) = toks.first() else {
            continue;
        };
        let col = |k| token_column(line, k);
        match head {
            "tier" => {
                if toks.len() != 2 {
                    return Err(at(line_no, col(0), "expected `tier symbolic|numeric`"));
                }
                if tier_fixed || !atoms.is_empty() || !density.is_empty() {
                    return Err(at(line_no, col(0), "`tier` must come first and only once"));
                }
                tier = toks[1].parse().map_err(|e| at(line_no, col(1), e))?;
                tier_fixed = true;
            }
            "atom" => {
                if toks.len() != 3 {
                    return Err(at(line_no, col(0), "expected `atom <position> <weight>`"));
                }
                let pos = Position::parse(toks[1], tier).map_err(|e| at(line_no, col(1), e))?;
                let w = parse_rational(toks[2]).map_err(|e| at(line_no, col(2), e))?;
                atoms.push(Atom { pos, w });
            }
            "density" => {
                if toks.len() != 4 {
                    return Err(at(line_no, col(0), "expected `density <l> <u> <level>`"));
                }
                let mut v = [0.0; 3];
                for k in 0..3 {
                    v[k] = toks[k + 1].parse().map_err(|e| at(line_no, col(k + 1), e))?;
                }
                density.push(Piece { l: v[0], u: v[1], level: v[2] });
            }
            other => return Err(at(line_no, col(0), format!("unknown directive `{other}`"))),
        }
    }
    Ok(Measure::new(tier, atoms, density)?)
}

fn render_text(m: &Measure) -> String {
    let mut out = format!("tier {}\n", m.tier());
    for a in m.atoms() {
        out.push_str(&format!("atom {} {}\n", a.pos.canonical(), format_rational(&a.w)));
    }
    for p in m.density() {
        out.push_str(&format!("density {} {} {}\n", p.l, p.u, p.level));
    }
    out
}

/// `pos,w` rows. Repeated positions merge with a warning, or fail under `strict`.
fn parse_csv(text: &str, tier: Tier, strict: bool) -> Result<(Measure, Vec<String>), CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Parse(format!("csv header: {e}")))?.clone();
    if headers.len() != 2 || &headers[0] != "pos" || &headers[1] != "w" {
        return Err(at(1, 1, "expected the header `pos,w`"));
    }
    let mut atoms: Vec<(Atom, usize)> = Vec::new();
    let mut warnings = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Parse(format!("csv: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(at(line, 1, format!("expected 2 fields, found {}", rec.len())));
        }
        let w_col = rec[0].chars().count() + 2;
        let pos = Position::parse(&rec[0], tier).map_err(|e| at(line, 1, e))?;
        let w = parse_rational(&rec[1]).map_err(|e| at(line, w_col, e))?;
        if let Some((_, first)) = atoms.iter().find(|(a, _)| a.pos.coincide(&pos) != Coincidence::Apart) {
            let msg = format!("line {line}: position {} repeats line {first}", pos.canonical());
            if strict {
                return Err(CliError::Parse(msg));
            }
            warnings.push(format!("{msg}; weights merged"));
        }
        atoms.push((Atom { pos, w }, line));
    }
    let m = Measure::new(tier, atoms.into_iter().map(|(a, _)| a).collect(), Vec::new())?;
    Ok((m, warnings))
}

fn render_csv(m: &Measure) -> Result<String, CliError> {
    if !m.is_atomic() {
        return Err(CliError::Usage("a CSV atom list cannot hold density pieces".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io { path: "<csv>".into(), message: e.to_string() };
    w.write_record(["pos", "w"]).map_err(io)?;
    for a in m.atoms() {
        w.write_record([a.pos.canonical(), format_rational(&a.w)]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads a measure; `tier` applies to CSV input and to text without a
/// `tier` line.
pub fn read_measure(
    path: &Path,
    format: Option<Format>,
    tier: Tier,
    strict: bool,
) -> Result<(Measure, Vec<String>), CliError> {
    let format = match format {
        Some(f) => f,
        None => Format::detect(path).unwrap_or(Format::Json),
    };
    let text = read_file(path)?;
    let with_path = |e: CliError| CliError::Parse(format!("{}: {e}", path.display()));
    match format {
        Format::Json => Ok((Measure::from_json_str(&text).map_err(|e| with_path(e.into()))?, Vec::new())),
        Format::Text => Ok((parse_text(&text, tier).map_err(with_path)?, Vec::new())),
        Format::Csv => parse_csv(&text, tier, strict).map_err(with_path),
    }
}

pub fn render_measure(m: &Measure, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(format!("{}\n", m.to_json_string())),
        Format::Text => Ok(render_text(m)),
        Format::Csv => render_csv(m),
    }
}

fn evaluate(m: &Measure, assignment: &Assignment) -> Result<Measure, CliError> {
    let atoms = m
        .atoms()
        .iter()
        .map(|a| Ok(Atom { pos: Position::Float(a.pos.evaluate(assignment)?), w: a.w.clone() }))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Measure::new(Tier::Numeric, atoms, m.density().to_vec())?)
}

/// Converts `input` to `output`, returning warnings. A non-empty
/// `assignment` evaluates every symbol and yields a numeric measure.
pub fn convert(
    input: &Path,
    output: &Path,
    from: Option<Format>,
    to: Option<Format>,
    tier: Tier,
    strict: bool,
    assignment: &Assignment,
) -> Result<Vec<String>, CliError> {
    let from = match from {
        Some(f) => f,
        None => Format::detect(input)?,
    };
    let to = match to {
        Some(f) => f,
        None => Format::detect(output)?,
    };
    let (mut m, warnings) = read_measure(input, Some(from), tier, strict)?;
    if !assignment.is_empty() {
        m = evaluate(&m, assignment)?;
    }
    write_file(output, render_measure(&m, to)?.as_bytes())?;
    Ok(warnings)
}
