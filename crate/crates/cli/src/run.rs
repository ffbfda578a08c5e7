//! Executes a [`RunConfig`] against the library.

use anyhow::{Context, Result};
use multisum::asymptotics::{
    contraction_check, gamma_ratio_bound, inclusion_ratio, limit_order_fit, FitOptions, LimitOrderQuery, SignPattern,
};
use multisum::multilinear::{random_dense_operator, Codomain, OperatorDocument, SupNormOptions};
use multisum::stable::{constant_c, AGREEMENT_TOL};
use multisum::summing::{basis_lower_bound, search_lower_bound, SearchOptions};
use multisum::{estimate_pi, rng, Field, MonteCarlo, MultilinearOperator};

use crate::record::{AlphaKind, ConstantOutput, Outputs, Params, PiOutput, RunConfig};

/// Parameter error raised by the front end itself (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn monte_carlo(cfg: &RunConfig, field: Field) -> Result<MonteCarlo> {
    let (Some(seed), Some(n), Some(k)) = (cfg.seed, cfg.n_samples, cfg.blocks) else {
        return Err(usage(format!("`{}` needs a seed, a sample count and a block count", cfg.params.name())));
    };
    Ok(MonteCarlo::new(n, k, seed).with_field(field))
}

fn operator(doc: &OperatorDocument) -> Result<MultilinearOperator> {
    Ok(MultilinearOperator::try_from(doc.clone())?)
}

pub fn execute(cfg: &RunConfig) -> Result<Outputs> {
    match &cfg.params {
        Params::CConst { s, q, field } => {
            // every failure here is a bad flag combination, including q ≥ s
            let constant = constant_c(*s, *q, *field).map_err(|e| usage(e.to_string()))?;
            Ok(Outputs::Constant(ConstantOutput {
                relative_disagreement: constant.relative_disagreement(),
                tolerance: AGREEMENT_TOL,
                constant,
            }))
        }
        Params::Pi { operator: doc, p, r, field, search, .. } => {
            let op = operator(doc)?;
            let mc = monte_carlo(cfg, *field)?;
            let estimate = estimate_pi(&op, *p, *r, &mc)?;
            let basis = basis_lower_bound(&op, *p, *r)?;
            let (search, search_note) = match search {
                None => (None, Some("search disabled".to_string())),
                Some(_) if op.field() == Field::Complex => {
                    (None, Some("the lower-bound search supports real operators only".to_string()))
                }
                Some(s) => {
                    let opts = SearchOptions {
                        family_size: s.family_size,
                        restarts: s.restarts,
                        rounds: s.rounds,
                        seed: rng::substream(mc.seed, 1),
                        ..Default::default()
                    };
                    (Some(search_lower_bound(&op, *p, *r, &opts)?), None)
                }
            };
            Ok(Outputs::Pi(PiOutput { estimate, basis_lower_bound: basis, search, search_note }))
        }
        Params::LimitOrder { m, r, q, n_list, bootstrap, tolerance, table } => {
            let mc = monte_carlo(cfg, Field::Real)?;
            let fit = limit_order_fit(
                &LimitOrderQuery::new(*m, *r, *q),
                n_list,
                &mc,
                &FitOptions { bootstrap: *bootstrap, tolerance: *tolerance },
            )?;
            if let Some(path) = table {
                std::fs::write(path, fit.table_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(Outputs::LimitOrder(fit))
        }
        Params::Contraction { operator: doc, p, r, alpha, flip_index, .. } => {
            let op = operator(doc)?;
            let mc = monte_carlo(cfg, op.field())?;
            let pattern = match alpha {
                AlphaKind::Ones => SignPattern::Ones,
                AlphaKind::Flip => SignPattern::SingleFlip { index: *flip_index },
                AlphaKind::Random => SignPattern::RandomSigns { seed: rng::substream(mc.seed, 2) },
            };
            let coeffs = pattern.build(op.arity(), op.dim())?;
            Ok(Outputs::Contraction(contraction_check(&op, &coeffs, *p, *r, &mc)?))
        }
        Params::Inclusion { m, q, r, n_list, p1, p2, codomain } => {
            let mc = monte_carlo(cfg, Field::Real)?;
            let family = n_list
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    random_dense_operator(*m, n, *r, Codomain::sequence(*q, n)?, false, rng::substream(mc.seed, 100 + i as u64))
                })
                .collect::<multisum::Result<Vec<_>>>()?;
            Ok(Outputs::Inclusion(inclusion_ratio(&family, *p1, *p2, *r, *codomain, &mc)?))
        }
        Params::GammaBound { operator: doc, p, field, sup_restarts, .. } => {
            let op = operator(doc)?;
            let mc = monte_carlo(cfg, *field)?;
            let sup = SupNormOptions { restarts: *sup_restarts, seed: rng::substream(mc.seed, 3), ..Default::default() };
            Ok(Outputs::GammaBound(gamma_ratio_bound(&op, *p, &mc, &sup)?))
        }
    }
}

/// Loads an operator document, mapping a missing file to an I/O failure and
/// malformed content to a parse failure.
pub fn load_operator(path: &std::path::Path) -> Result<OperatorDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let op = MultilinearOperator::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(OperatorDocument::from(&op))
}
