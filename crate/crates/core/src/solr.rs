//! Short-open-load-reciprocal calibration, used as an independent reference
//! for the SRM solver. Each port is fitted from three (or more) fully
//! defined one-port standards; `k` comes from an unknown reciprocal two-port.

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::rf::matrix::ComplexMatrix2;
use crate::rf::network::FrequencyNetwork;
use crate::rf::sparams::s_to_t;
use crate::rf::Complex;
use crate::srm::measurement::DefinedMeasurement;
use crate::srm::model::{ErrorModel, ErrorTerms};
use crate::srm::steps::{defined_row, solve_k, solve_one_port, KOptions, Port};

#[derive(Debug, Clone, Copy, Default)]
pub struct SolrOptions {
    pub k: KOptions,
    pub execution: Execution,
}

/// Solves the seven error terms from defined one-port standards and a
/// reciprocal thru. `transmission_estimate` is a rough S21 of the thru,
/// used only to pick the sign of `k`.
pub fn solr_calibrate(
    standards: &[DefinedMeasurement],
    recip: &FrequencyNetwork,
    transmission_estimate: &[Complex],
    opts: &SolrOptions,
) -> Result<ErrorModel> {
    if standards.len() < 3 {
        return Err(Error::RankDeficient {
            reason: format!("{} defined standards, at least 3 required", standards.len()),
        });
    }
    let grid = recip.frequencies();
    for s in standards {
        s.validate(grid)?;
    }
    let recip_s = recip.two_port_data()?;
    if transmission_estimate.len() != grid.len() {
        return Err(Error::Precondition("transmission estimate length differs from grid".into()));
    }

    let columns = |port: Port| -> Vec<(Vec<Complex>, Vec<Complex>)> {
        standards
            .iter()
            .map(|s| match port {
                Port::A => (s.measured_left.gamma_left(), s.definition_left.gammas()),
                Port::B => (s.measured_right.gamma_right(), s.definition_right.gammas()),
            })
            .collect()
    };
    let cols_a = columns(Port::A);
    let cols_b = columns(Port::B);
    let fit = |cols: &[(Vec<Complex>, Vec<Complex>)], port: Port, i: usize| {
        let rows: Vec<_> = cols.iter().map(|(m, d)| defined_row(port, d[i], m[i])).collect();
        solve_one_port(&rows, port)
    };

    let boxes: Vec<(ComplexMatrix2, ComplexMatrix2, ComplexMatrix2)> = map_indexed(grid.len(), opts.execution, |i| {
        (|| {
            let a = fit(&cols_a, Port::A, i)?;
            let b = fit(&cols_b, Port::B, i)?;
            Ok((a, b, s_to_t(&recip_s[i])?))
        })()
        .map_err(|e: Error| e.at(i))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let a: Vec<_> = boxes.iter().map(|x| x.0).collect();
    let b: Vec<_> = boxes.iter().map(|x| x.1).collect();
    let m: Vec<_> = boxes.iter().map(|x| x.2).collect();
    let ks = solve_k(&a, &b, &m, transmission_estimate, &opts.k)?;
    let terms = a
        .into_iter()
        .zip(b)
        .zip(ks)
        .map(|((a, b), k)| ErrorTerms { a, b, k: k.k })
        .collect();
    let mut model = ErrorModel::new(grid.to_vec(), terms)?;
    model.reference_impedance = recip.reference_impedance();
    Ok(model)
}
