//! The worked examples: two-dimensional projections of Sobol', Faure and
//! generalized Faure constructions with 1024 points, their β and C values
//! in several bases, and replicated-scramble variances.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::digits::{default_precision, PointSet};
use crate::error::{Error, Result};
use crate::fieldlinalg::GeneratingMatrices;
use crate::netgen::{
    faure_matrices, gfaure_matrices, sequence_prefix_from_matrices, sobol_unit_matrices,
};
use crate::quality::{quality_profile, render_decimal, QualityProfile};
use crate::scramble::{rebase, ScrambleSpec};
use crate::seed::child_seed;
use crate::variance::{estimate_variance, monte_carlo_baseline, Integrand};

pub const N_POINTS: usize = 1024;
/// Bundled Sobol' coordinates (1-based) standing in for the top and bottom
/// projections of the first example. The source's polynomial ordering is not
/// published; these pairs reproduce its base-2 β rows.
pub const FIG1_TOP_COORDS: [usize; 2] = [23, 24];
pub const FIG1_BOTTOM_COORDS: [usize; 2] = [16, 17];
/// Coordinates of the 53-dimensional Faure and generalized Faure sequences.
pub const FIG2_COORDS: [usize; 2] = [49, 50];
/// Coordinates of the 17-dimensional base-17 Faure sequence and the Sobol'
/// sequence in the third example.
pub const FIG3_COORDS: [usize; 2] = [16, 17];
pub const DEFAULT_GFAURE_SEED: u64 = 2021;

/// Which matrices back each example. Imported matrices must already be the
/// two-dimensional projection.
#[derive(Clone, Debug)]
pub struct TableConfig {
    pub gfaure_seed: u64,
    pub fig1_top: Option<GeneratingMatrices>,
    pub fig1_bottom: Option<GeneratingMatrices>,
    pub fig3_sobol: Option<GeneratingMatrices>,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig { gfaure_seed: DEFAULT_GFAURE_SEED, fig1_top: None, fig1_bottom: None, fig3_sobol: None }
    }
}

fn zero_based(coords: [usize; 2]) -> [usize; 2] {
    [coords[0] - 1, coords[1] - 1]
}

fn sobol_projection(coords: [usize; 2], imported: &Option<GeneratingMatrices>) -> Result<PointSet> {
    let mats = match imported {
        Some(g) => {
            if g.base() != 2 || g.dim() != 2 {
                return Err(Error::InvalidArgument("imported Sobol' matrices must be base 2 with s = 2".into()));
            }
            g.clone()
        }
        None => sobol_unit_matrices(coords[1], 10, 10)?.select(&zero_based(coords))?,
    };
    let ps = sequence_prefix_from_matrices(&mats, N_POINTS)?;
    Ok(ps)
}

pub fn fig1_top(cfg: &TableConfig) -> Result<PointSet> {
    sobol_projection(FIG1_TOP_COORDS, &cfg.fig1_top)
}

pub fn fig1_bottom(cfg: &TableConfig) -> Result<PointSet> {
    sobol_projection(FIG1_BOTTOM_COORDS, &cfg.fig1_bottom)
}

pub fn fig2_faure_matrices() -> Result<GeneratingMatrices> {
    faure_matrices(53, 53, default_precision(53))?.select(&zero_based(FIG2_COORDS))
}

pub fn fig2_gfaure_matrices(seed: u64) -> Result<GeneratingMatrices> {
    gfaure_matrices(53, 53, default_precision(53), seed)?.select(&zero_based(FIG2_COORDS))
}

pub fn fig2_faure() -> Result<PointSet> {
    sequence_prefix_from_matrices(&fig2_faure_matrices()?, N_POINTS)
}

pub fn fig2_gfaure(cfg: &TableConfig) -> Result<PointSet> {
    sequence_prefix_from_matrices(&fig2_gfaure_matrices(cfg.gfaure_seed)?, N_POINTS)
}

pub fn fig3_faure_matrices() -> Result<GeneratingMatrices> {
    faure_matrices(17, 17, default_precision(17))?.select(&zero_based(FIG3_COORDS))
}

pub fn fig3_faure() -> Result<PointSet> {
    sequence_prefix_from_matrices(&fig3_faure_matrices()?, N_POINTS)
}

/// Best effort with bundled unit direction numbers unless matrices are
/// imported.
pub fn fig3_sobol(cfg: &TableConfig) -> Result<PointSet> {
    sobol_projection(FIG3_COORDS, &cfg.fig3_sobol)
}

/// Quality profile of `ps` counted in base `b`, re-expanding digits first
/// when the construction base differs.
pub fn profile_in_base(ps: &PointSet, b: u32) -> Result<QualityProfile> {
    if ps.base() == b {
        quality_profile(ps, b)
    } else {
        quality_profile(&rebase(ps, b, default_precision(b))?, b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub base: u32,
    /// β_{b,1}, β_{b,2}, … up to the row's column count.
    #[serde(with = "rational_vec")]
    pub beta: Vec<BigRational>,
    #[serde(with = "crate::quality::rational_string")]
    pub c_max: BigRational,
}

impl TableRow {
    fn from_profile(label: &str, p: &QualityProfile, levels: u32) -> Self {
        TableRow {
            label: label.to_string(),
            base: p.base,
            beta: (1..=levels).map(|l| p.beta(l)).collect(),
            c_max: p.c_max.clone(),
        }
    }

    pub fn beta_decimal(&self, level: usize) -> Option<String> {
        self.beta.get(level.checked_sub(1)?).map(|r| render_decimal(r, 2))
    }

    pub fn c_decimal(&self) -> String {
        render_decimal(&self.c_max, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityTable {
    pub number: u8,
    pub caption: String,
    pub rows: Vec<TableRow>,
}

impl QualityTable {
    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// One line per row: label, base, β_{b,k} for each column, C_b. Cells
    /// past a row's column count are empty. `exact` writes full rationals.
    pub fn to_csv(&self, exact: bool) -> String {
        let width = self.rows.iter().map(|r| r.beta.len()).max().unwrap_or(0);
        let cell = |r: &BigRational| if exact { r.to_string() } else { render_decimal(r, 2) };
        let mut out = String::from("point_set,b");
        for k in 1..=width {
            out.push_str(&format!(",k={k}"));
        }
        out.push_str(",C_b\n");
        for row in &self.rows {
            out.push_str(&format!("{},{}", row.label, row.base));
            for k in 0..width {
                out.push(',');
                if let Some(v) = row.beta.get(k) {
                    out.push_str(&cell(v));
                }
            }
            out.push_str(&format!(",{}\n", cell(&row.c_max)));
        }
        out
    }
}

/// Tables 1 to 4 of the worked examples.
pub fn quality_table(which: u8, cfg: &TableConfig) -> Result<QualityTable> {
    let (caption, rows) = match which {
        1 => {
            let top = profile_in_base(&fig1_top(cfg)?, 2)?;
            let bottom = profile_in_base(&fig1_bottom(cfg)?, 2)?;
            (
                "beta_{b,k} and C_b for b = 2, Sobol' projections with unit direction numbers",
                vec![TableRow::from_profile("1st pt set (top)", &top, 13), TableRow::from_profile("2nd pt set (bottom)", &bottom, 13)],
            )
        }
        2 => {
            let top = profile_in_base(&fig1_top(cfg)?, 53)?;
            let bottom = profile_in_base(&fig1_bottom(cfg)?, 53)?;
            (
                "beta_{b,k} and C_b for b = 53, Sobol' projections with unit direction numbers",
                vec![TableRow::from_profile("1st pt set", &top, 2), TableRow::from_profile("2nd pt set", &bottom, 2)],
            )
        }
        3 => {
            let f = profile_in_base(&fig2_faure()?, 2)?;
            let g = profile_in_base(&fig2_gfaure(cfg)?, 2)?;
            (
                "beta_{b,k} and C_b for b = 2, first 1024 points of (0,2)-sequences in base 53",
                vec![TableRow::from_profile("Faure (top)", &f, 16), TableRow::from_profile("GFaure (bottom)", &g, 16)],
            )
        }
        4 => {
            let sob = fig3_sobol(cfg)?;
            let fau = fig3_faure()?;
            let mut rows = Vec::new();
            for (b, levels) in [(2u32, 17u32), (3, 17)] {
                rows.push(TableRow::from_profile(&format!("Sobol' (b={b})"), &profile_in_base(&sob, b)?, levels));
                rows.push(TableRow::from_profile(&format!("Faure (b={b})"), &profile_in_base(&fau, b)?, levels));
            }
            rows.push(TableRow::from_profile("Sobol' (b=17)", &profile_in_base(&sob, 17)?, 4));
            rows.push(TableRow::from_profile("Faure (b=17)", &profile_in_base(&fau, 17)?, 4));
            ("beta_{b,k} and C_b for b in {2, 3, 17}, coordinates (16,17) of Sobol' and base-17 Faure", rows)
        }
        _ => return Err(Error::InvalidArgument(format!("quality tables are 1 to 4, got {which}"))),
    };
    Ok(QualityTable { number: which, caption: caption.to_string(), rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceCell {
    pub scramble_base: u32,
    pub variance: f64,
    pub mean: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub label: String,
    pub cells: Vec<VarianceCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceTable {
    pub c: f64,
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<VarianceRow>,
    pub monte_carlo: f64,
}

impl VarianceTable {
    pub fn variance(&self, label: &str, base: u32) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.label == label)?
            .cells
            .iter()
            .find(|c| c.scramble_base == base)
            .map(|c| c.variance)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("point_set,scramble_base,variance,scramble_base,variance\n");
        for row in &self.rows {
            out.push_str(&row.label);
            for c in &row.cells {
                out.push_str(&format!(",{},{:.2e}", c.scramble_base, c.variance));
            }
            out.push('\n');
        }
        out.push_str(&format!("Monte Carlo,,{:.2e},,\n", self.monte_carlo));
        out
    }
}

/// Variances of nested-uniform-scrambled estimators of
/// `∏ (1 + c (u_j - 1/2))` for each example and two scrambling bases, with
/// the Monte Carlo variance at the same `n`.
pub fn variance_table(cfg: &TableConfig, c: f64, replicates: usize, seed: u64) -> Result<VarianceTable> {
    let f = Integrand::product_linear(c, 2);
    let sets: Vec<(&str, PointSet, [u32; 2])> = vec![
        ("Sobol' Fig. 1-top", fig1_top(cfg)?, [2, 53]),
        ("Sobol' Fig. 1-bottom", fig1_bottom(cfg)?, [2, 53]),
        ("Faure Fig. 2", fig2_faure()?, [2, 53]),
        ("GFaure Fig. 2", fig2_gfaure(cfg)?, [2, 53]),
        ("Sobol' Fig. 3", fig3_sobol(cfg)?, [2, 17]),
        ("Faure Fig. 3", fig3_faure()?, [2, 17]),
    ];
    let mut rows = Vec::new();
    for (i, (label, ps, bases)) in sets.into_iter().enumerate() {
        let mut cells = Vec::new();
        for b in bases {
            let s = child_seed(seed, &[i as u64, b as u64]);
            let rep = estimate_variance(&ps, &ScrambleSpec::nested(b, s), &f, replicates)?;
            cells.push(VarianceCell { scramble_base: b, variance: rep.variance, mean: rep.mean, seed: s });
        }
        rows.push(VarianceRow { label: label.to_string(), cells });
    }
    let mc = monte_carlo_baseline(&f, 2, N_POINTS, replicates, child_seed(seed, &[u64::MAX]))?;
    Ok(VarianceTable { c, replicates, seed, rows, monte_carlo: mc.variance })
}

/// Zero-padded view used when comparing against printed rows.
pub fn beta_row(p: &QualityProfile, levels: u32) -> Vec<BigRational> {
    (1..=levels).map(|l| p.beta(l)).collect()
}

mod rational_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| r.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| t.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn is_all_zero(v: &[BigRational]) -> bool {
        v.iter().all(Zero::is_zero)
    }

    #[test]
    fn fig2_faure_base53_is_cqe() {
        let p = profile_in_base(&fig2_faure().unwrap(), 53).unwrap();
        assert!(p.cqe);
        assert!(is_all_zero(&beta_row(&p, 4)[1..]));
    }

    #[test]
    fn csv_layout() {
        let cfg = TableConfig::default();
        let t = quality_table(2, &cfg).unwrap();
        let csv = t.to_csv(false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "point_set,b,k=1,k=2,C_b");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("2nd pt set,53,0.95,"));
    }
}
