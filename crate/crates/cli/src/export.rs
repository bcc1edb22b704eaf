//! JSON and CSV files.
//!
//! CSV layouts:
//! - residual reports: `identity,spacing,sup,l2`, one row per resolution;
//! - annulus tables: `r_lo,r_hi,quantity,sup,l2,fitted_slope`;
//! - profile samples: `s,x,z,theta`.

use std::io::{Read, Write};
use std::path::Path;

use expander_core::conegraph::AnnulusRow;
use expander_core::profiles::{asymptotic_angle, Family, Profile, ProfileOptions};
use expander_core::verify::{ResidualReport, ResidualSample};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// A profile as stored on disk, re-importable by `verify` and `asymptotics`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub n: usize,
    pub family: Family,
    pub shoot_param: f64,
    pub tol: f64,
    pub alpha_hat: Option<f64>,
    pub residual_sup: f64,
    pub speed_defect: f64,
    pub options: ProfileOptions,
    /// `[s, x, z, θ]` rows.
    pub samples: Vec<[f64; 4]>,
}

impl ProfileDocument {
    pub fn new(profile: &Profile) -> Self {
        ProfileDocument {
            n: profile.n,
            family: profile.family,
            shoot_param: profile.shoot_param,
            tol: profile.options.tol,
            alpha_hat: asymptotic_angle(profile).ok().map(|a| a.alpha_hat),
            residual_sup: profile.residual_sup,
            speed_defect: profile.speed_defect,
            options: profile.options,
            samples: profile.samples.clone(),
        }
    }

    pub fn into_profile(self) -> CliResult<Profile> {
        if self.tol != self.options.tol {
            return Err(CliError::Config(format!(
                "profile document has tol {} but options.tol {}",
                self.tol, self.options.tol
            )));
        }
        Ok(Profile {
            n: self.n,
            family: self.family,
            shoot_param: self.shoot_param,
            options: self.options,
            samples: self.samples,
            residual_sup: self.residual_sup,
            speed_defect: self.speed_defect,
        })
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    write_text(path, &to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}

#[derive(Debug, Serialize, Deserialize)]
struct ResidualRow {
    identity: String,
    spacing: f64,
    sup: f64,
    l2: f64,
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Computation(format!("csv: {e}"))
}

pub fn write_residual_csv<W: Write>(out: W, reports: &[ResidualReport]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["identity", "spacing", "sup", "l2"]).map_err(csv_error)?;
    for r in reports {
        for k in 0..r.resolutions.len() {
            w.serialize(ResidualRow {
                identity: r.identity_name.clone(),
                spacing: r.resolutions[k],
                sup: r.sup_residuals[k],
                l2: r.l2_residuals[k],
            })
            .map_err(csv_error)?;
        }
    }
    w.flush().map_err(|e| CliError::Computation(format!("csv: {e}")))
}

/// Rebuilds reports from the residual CSV; fitted orders are recomputed from
/// the stored norms.
pub fn read_residual_csv<R: Read>(input: R) -> CliResult<Vec<ResidualReport>> {
    let mut groups: Vec<(String, Vec<ResidualSample>)> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize::<ResidualRow>() {
        let row = row.map_err(|e| CliError::Config(format!("residual csv: {e}")))?;
        let sample = ResidualSample { spacing: row.spacing, sup: row.sup, l2: row.l2, values: Vec::new() };
        match groups.last_mut() {
            Some((name, v)) if *name == row.identity => v.push(sample),
            _ => groups.push((row.identity, vec![sample])),
        }
    }
    groups
        .iter()
        .map(|(name, samples)| ResidualReport::from_samples(name, samples).map_err(CliError::from))
        .collect()
}

pub fn write_annulus_csv<W: Write>(out: W, rows: &[AnnulusRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r_lo", "r_hi", "quantity", "sup", "l2", "fitted_slope"]).map_err(csv_error)?;
    for r in rows {
        let slope = r.fitted_slope.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([
            r.annulus[0].to_string(),
            r.annulus[1].to_string(),
            r.quantity.clone(),
            r.sup.to_string(),
            r.l2.to_string(),
            slope,
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| CliError::Computation(format!("csv: {e}")))
}

pub fn write_samples_csv<W: Write>(out: W, samples: &[[f64; 4]]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "x", "z", "theta"]).map_err(csv_error)?;
    for p in samples {
        w.write_record(p.iter().map(f64::to_string)).map_err(csv_error)?;
    }
    w.flush().map_err(|e| CliError::Computation(format!("csv: {e}")))
}

pub fn create(path: &Path) -> CliResult<std::fs::File> {
    std::fs::File::create(path).map_err(|e| CliError::io(path, e))
}
