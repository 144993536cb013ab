use serde::{Deserialize, Serialize};

use super::operator::{build_operator, compose_norm, Player};
use crate::error::Result;
use crate::fixpoint::{iterate_fixpoint, FixpointConfig};
use crate::randomness::Params;

/// One line of the norm sweep report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSweepRow {
    pub q: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub norm: f64,
    pub sup_i_a: f64,
    pub sup_i_b: f64,
    pub i_a_at_right: f64,
    pub i_b_at_right: f64,
}

/// Solves the fixed point at `(q, lambda)` on `config.segments` and measures `||L_B o L_A||`.
pub fn norm_sweep_row(params: Params<f64>, config: &FixpointConfig) -> Result<NormSweepRow> {
    let fp = iterate_fixpoint(params, config)?;
    let la = build_operator(Player::A, &fp)?;
    let lb = build_operator(Player::B, &fp)?;
    let norm = compose_norm(&lb, &la)?;
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, &x| m.max(x));
    Ok(NormSweepRow {
        q: params.q,
        lambda: params.lambda,
        n: config.segments,
        norm,
        sup_i_a: sup(la.i_values()),
        sup_i_b: sup(lb.i_values()),
        i_a_at_right: la.right_limit().i_value,
        i_b_at_right: lb.right_limit().i_value,
    })
}

pub fn norm_sweep_csv(rows: &[NormSweepRow]) -> String {
    let mut out = String::from("q,lambda,N,norm,sup_I_A,sup_I_B,I_A_at_right,I_B_at_right\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.q, r.lambda, r.n, r.norm, r.sup_i_a, r.sup_i_b, r.i_a_at_right, r.i_b_at_right
        ));
    }
    out
}
