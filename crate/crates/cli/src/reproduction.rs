//! Closed-form reference numbers, recomputed from the model.

use nvmag::analysis::TheoreticalBudget;
use nvmag::neuro::{purkinje_estimate, scaling_constant};
use nvmag::odmr::{optimal_deviation, slope_maximizing_deviation, DispersionMode};
use nvmag::sensor::{
    cascade_response, coil_field, fractional_lif_change, ramsey_sensitivity, spin_projection_limit,
    Penalties,
};
use nvmag::{AxonParams, LockInConfig, NoiseBudget, OdmrParams};

use crate::error::Result;
use crate::report::Node;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: &'static str,
    pub value: f64,
    pub reference: f64,
    /// Accepted interval for `value`.
    pub bounds: (f64, f64),
    pub unit: &'static str,
}

impl Row {
    pub fn relative_error(&self) -> f64 {
        (self.value - self.reference) / self.reference
    }

    pub fn within(&self) -> bool {
        (self.bounds.0..=self.bounds.1).contains(&self.value)
    }
}

fn row(
    quantity: &'static str,
    value: f64,
    reference: f64,
    tolerance: f64,
    unit: &'static str,
) -> Row {
    let half = (reference * tolerance).abs();
    Row {
        quantity,
        value,
        reference,
        bounds: (reference - half, reference + half),
        unit,
    }
}

/// Budget of the default 400 mV / 50 Ω photodiode at 1.5 MHz linewidth and
/// 5.3 % two-axis contrast, with the spin-projection line for 8e11 spins.
pub fn default_budget() -> Result<TheoreticalBudget<f64>> {
    Ok(TheoreticalBudget {
        chain: NoiseBudget::default().chain(1.5e6, 0.053)?,
        spin_projection: spin_projection_limit(8e11, 450e-9)?,
    })
}

pub fn reproduction_table() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let squid_like = AxonParams {
        r_a: 200e-6,
        rho: 300e-6,
        v_c: 9.0,
        ..AxonParams::squid()
    };
    rows.push(row(
        "scaling constant s",
        scaling_constant(&squid_like)?,
        13.7e-12,
        0.02,
        "T/(V/s)",
    ));
    for (r_a, b) in [(1e-6, 0.6e-9), (2e-6, 1.1e-9), (3e-6, 1.7e-9)] {
        rows.push(row(
            "Purkinje peak field",
            purkinje_estimate(r_a)?,
            b,
            0.10,
            "T",
        ));
    }
    rows.push(row(
        "coil field",
        coil_field(7, 0.88e-3, 0.0235, 0.103)?,
        1.8e-9,
        0.02,
        "T",
    ));

    let budget = default_budget()?;
    rows.push(row(
        "shot-noise sensitivity",
        budget.chain.shot,
        2.9e-12,
        0.05,
        "T/rtHz",
    ));
    rows.push(row(
        "CW-ESR sensitivity",
        budget.chain.cw_esr,
        4.9e-12,
        0.05,
        "T/rtHz",
    ));
    rows.push(row(
        "full-chain sensitivity",
        budget.chain.full,
        17e-12,
        0.05,
        "T/rtHz",
    ));
    rows.push(row(
        "spin-projection limit",
        budget.spin_projection,
        9.5e-15,
        0.10,
        "T/rtHz",
    ));

    let rate = NoiseBudget::default().photon_rate();
    let ramsey = ramsey_sensitivity(1e-6, 450e-9, 400e-9, 0.095, rate)?;
    // Only a factor-of-two band around the quoted improvement is meaningful.
    rows.push(Row {
        bounds: (2.5, 10.0),
        ..row(
            "CW-ESR / Ramsey improvement",
            budget.chain.cw_esr / ramsey,
            5.0,
            0.0,
            "x",
        )
    });
    rows.push(row(
        "fractional LIF change at 3 nT",
        fractional_lif_change(3e-9, 1.5e6, 0.053, &Penalties::default())?,
        1.4e-6,
        0.25,
        "",
    ));

    let p = OdmrParams::default();
    rows.push(row(
        "slope-maximising deviation",
        slope_maximizing_deviation(&p, DispersionMode::SingleFeature)?,
        optimal_deviation(p.gamma),
        1e-3,
        "rad/s",
    ));
    let cascade = cascade_response(&LockInConfig::default(), 250e3)?;
    rows.push(row("lock-in 3 dB cutoff", cascade.f_c, 3.6e3, 0.30, "Hz"));
    rows.push(row("lock-in ENBW", cascade.enbw, 4.0e3, 0.30, "Hz"));
    Ok(rows)
}

pub fn table_node(rows: &[Row]) -> Node {
    let items: Vec<Node> = rows
        .iter()
        .map(|r| {
            Node::map()
                .with("quantity", r.quantity)
                .with("value", r.value)
                .with("reference", r.reference)
                .with("relative_error", r.relative_error())
                .with("bounds", vec![r.bounds.0, r.bounds.1])
                .with("unit", r.unit)
                .with("within", r.within())
        })
        .collect();
    Node::from(items)
}
