//! Touchstone v1.1 reader and writer for `.s1p` and `.s2p` files.
//!
//! The option line has the form `# <unit> S <RI|MA|DB> R <z0>`; missing
//! fields default to `GHz`, `MA` and 50 Ω as the format prescribes. Comments
//! start with `!` and may trail data. Two-port data records are ordered
//! S11 S21 S12 S22 and may wrap over several lines.
//!
//! Files are always written in RI format with frequencies in Hz and 16
//! significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::matrix::{c, Complex};
use super::network::{FrequencyNetwork, NetworkData};
use super::sparams::SParams2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DataFormat {
    Ri,
    Ma,
    Db,
}

struct Options {
    multiplier: f64,
    format: DataFormat,
    z0: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            multiplier: 1e9,
            format: DataFormat::Ma,
            z0: 50.0,
        }
    }
}

fn parse_option_line(line: &str, lineno: usize) -> Result<Options> {
    let mut opts = Options::default();
    let mut tokens = line.trim_start_matches('#').split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.multiplier = 1.0,
            "KHZ" => opts.multiplier = 1e3,
            "MHZ" => opts.multiplier = 1e6,
            "GHZ" => opts.multiplier = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unsupported parameter type '{tok}', only S is accepted"),
                })
            }
            "RI" => opts.format = DataFormat::Ri,
            "MA" => opts.format = DataFormat::Ma,
            "DB" => opts.format = DataFormat::Db,
            "R" => {
                let v = tokens.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "missing reference impedance after 'R'".into(),
                })?;
                opts.z0 = parse_number(v, lineno)?;
            }
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unknown option '{other}'"),
                })
            }
        }
    }
    Ok(opts)
}

fn parse_number(tok: &str, lineno: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("invalid number '{tok}'"),
    })
}

fn to_complex(format: DataFormat, x: f64, y: f64) -> Complex {
    match format {
        DataFormat::Ri => c(x, y),
        DataFormat::Ma => Complex::from_polar(x, y.to_radians()),
        DataFormat::Db => Complex::from_polar(10f64.powf(x / 20.0), y.to_radians()),
    }
}

/// Parses Touchstone text with the given port count.
pub fn parse_touchstone(text: &str, ports: usize, name: &str) -> Result<FrequencyNetwork> {
    if ports != 1 && ports != 2 {
        return Err(Error::Precondition(format!("{ports}-port Touchstone is not supported")));
    }
    let per_record = 1 + 2 * ports * ports;
    let mut opts: Option<Options> = None;
    let mut tokens: Vec<(f64, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if opts.is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    message: "duplicate option line".into(),
                });
            }
            opts = Some(parse_option_line(line, lineno)?);
            continue;
        }
        if line.starts_with('[') {
            return Err(Error::Parse {
                line: lineno,
                message: "Touchstone 2.0 keywords are not supported".into(),
            });
        }
        for tok in line.split_whitespace() {
            tokens.push((parse_number(tok, lineno)?, lineno));
        }
    }

    let opts = opts.unwrap_or_default();
    if !tokens.len().is_multiple_of(per_record) {
        let last = tokens.last().map(|t| t.1).unwrap_or(0);
        return Err(Error::Parse {
            line: last,
            message: format!(
                "incomplete record: {} values is not a multiple of {per_record}",
                tokens.len()
            ),
        });
    }

    let mut freqs = Vec::with_capacity(tokens.len() / per_record);
    let mut one = Vec::new();
    let mut two = Vec::new();
    for rec in tokens.chunks(per_record) {
        let f = rec[0].0 * opts.multiplier;
        if let Some(&prev) = freqs.last() {
            if f <= prev {
                return Err(Error::Grid(format!(
                    "{name}: frequency {f} Hz at line {} does not increase",
                    rec[0].1
                )));
            }
        }
        freqs.push(f);
        let vals: Vec<Complex> = rec[1..]
            .chunks(2)
            .map(|p| to_complex(opts.format, p[0].0, p[1].0))
            .collect();
        if ports == 1 {
            one.push(vals[0]);
        } else {
            // S11 S21 S12 S22
            two.push(SParams2::new(vals[0], vals[2], vals[1], vals[3]));
        }
    }
    let data = if ports == 1 {
        NetworkData::OnePort(one)
    } else {
        NetworkData::TwoPort(two)
    };
    FrequencyNetwork::new(name, freqs, data, c(opts.z0, 0.0))
}

/// Port count implied by a `.s1p` / `.s2p` extension.
pub fn ports_from_path(path: &Path) -> Result<usize> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "s1p" => Ok(1),
        "s2p" => Ok(2),
        _ => Err(Error::Precondition(format!(
            "{}: expected a .s1p or .s2p extension",
            path.display()
        ))),
    }
}

pub fn read_touchstone(path: impl AsRef<Path>) -> Result<FrequencyNetwork> {
    let path = path.as_ref();
    let ports = ports_from_path(path)?;
    let text = fs::read_to_string(path)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_touchstone(&text, ports, &name)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.15e}")
}

/// Renders a network as Touchstone text (RI, Hz, 16 significant digits).
pub fn format_touchstone(net: &FrequencyNetwork) -> String {
    let mut out = String::new();
    let z0 = net.reference_impedance();
    if z0.im != 0.0 {
        let _ = writeln!(out, "! complex reference impedance {} {}j, real part written", z0.re, z0.im);
    }
    let _ = writeln!(out, "# Hz S RI R {}", z0.re);
    let f = net.frequencies();
    match net.data() {
        NetworkData::OnePort(g) => {
            let _ = writeln!(out, "! freq ReS11 ImS11");
            for (fi, z) in f.iter().zip(g) {
                let _ = writeln!(out, "{} {} {}", fmt_num(*fi), fmt_num(z.re), fmt_num(z.im));
            }
        }
        NetworkData::TwoPort(s) => {
            let _ = writeln!(out, "! freq ReS11 ImS11 ReS21 ImS21 ReS12 ImS12 ReS22 ImS22");
            for (fi, sp) in f.iter().zip(s) {
                let _ = write!(out, "{}", fmt_num(*fi));
                for z in sp.touchstone_order() {
                    let _ = write!(out, " {} {}", fmt_num(z.re), fmt_num(z.im));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_touchstone(net: &FrequencyNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ports = ports_from_path(path)?;
    if ports != net.ports() {
        return Err(Error::Precondition(format!(
            "{}: extension implies {ports} ports but network has {}",
            path.display(),
            net.ports()
        )));
    }
    fs::write(path, format_touchstone(net))?;
    Ok(())
}
