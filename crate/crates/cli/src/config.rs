use std::path::PathBuf;

use clap::{Args, ValueEnum};
use superpartner::catalog::{self, CatalogEntry};
use superpartner::{Error, FamilyConstant, Grid, ParamPoint, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Catalog id, e.g. `poschl-teller`.
    #[arg(long)]
    pub potential: String,

    /// Comma-separated `name=value` list; unspecified parameters keep the
    /// entry defaults.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,

    /// Grid override as `lo:hi:n`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,

    /// Family constants, comma-separated; `inf` selects the particular solution.
    #[arg(long = "F", value_name = "F", allow_hyphen_values = true, default_value = "-2,-0.5,0,0.5,2,inf")]
    pub family: String,

    /// Number of levels for spectra and energy ladders.
    #[arg(long, default_value_t = 5)]
    pub levels: usize,

    /// Factorization label used by `family` (defaults to the first one).
    #[arg(long)]
    pub pair: Option<String>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub struct RunConfig {
    pub entry: CatalogEntry<f64>,
    pub params: ParamPoint<f64>,
    pub grid: Grid<f64>,
    pub family: Vec<FamilyConstant<f64>>,
    pub levels: usize,
    pub pair: Option<String>,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: RunArgs) -> Result<Self> {
        let entry = catalog::lookup::<f64>(&args.potential)?;
        let params = merge_params(&entry, args.params.as_deref())?;
        entry.potential.check_admissible(&params)?;
        let grid = match args.grid.as_deref() {
            Some(spec) => parse_grid(spec)?.with_anchor_near(entry.default_grid.anchor_x()),
            None => entry.default_grid,
        };
        let domain = entry.potential.domain;
        if !domain.contains_grid(&grid) {
            return Err(Error::OutsideDomain {
                lo: grid.x_lo(),
                hi: grid.x_hi(),
                domain_lo: domain.lo,
                domain_hi: domain.hi,
            });
        }
        let family = args
            .family
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(FamilyConstant::parse)
            .collect::<Result<Vec<_>>>()?;
        if let Some(label) = &args.pair {
            entry.require_pair(label)?;
        }
        Ok(Self {
            entry,
            params,
            grid,
            family,
            levels: args.levels,
            pair: args.pair,
            format: args.format,
            output: args.output,
        })
    }
}

fn merge_params(entry: &CatalogEntry<f64>, text: Option<&str>) -> Result<ParamPoint<f64>> {
    let mut out = entry.default_params.clone();
    let Some(text) = text else { return Ok(out) };
    let given = ParamPoint::<f64>::parse(text)?;
    for (name, value) in given.iter() {
        if !entry.potential.param_names.iter().any(|n| n == name) {
            return Err(Error::ParseParams(format!(
                "`{}` has no parameter `{name}` (expected: {})",
                entry.id,
                entry.potential.param_names.join(", ")
            )));
        }
        out = out.with(name, value);
    }
    Ok(out)
}

pub fn parse_grid(spec: &str) -> Result<Grid<f64>> {
    let bad = || Error::ParseParams(format!("grid `{spec}` is not of the form lo:hi:n"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    Grid::new(lo, hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        let g = parse_grid("-1:2.5:101").unwrap();
        assert_eq!((g.x_lo(), g.x_hi(), g.len()), (-1.0, 2.5, 101));
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:x").is_err());
        assert!(matches!(parse_grid("0:1:3"), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn params_merge_over_defaults() {
        let e = catalog::poschl_teller::<f64>();
        let a = merge_params(&e, Some("lambda=3")).unwrap();
        assert_eq!((a["alpha"], a["lambda"]), (1.0, 3.0));
        assert!(merge_params(&e, Some("beta=1")).is_err());
    }
}
