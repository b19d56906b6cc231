//! A grating designed with the correct dispersion but evaluated with a
//! perturbed Sellmeier model: internal identities must still hold while the
//! gain band moves.

use chirpsqueeze::dispersion::{DetuningGrid, SellmeierModel};
use chirpsqueeze::oracle::IntegrationSettings;
use chirpsqueeze::pdc::compute_spectra;
use chirpsqueeze::report::optical_half_max_edges_um;
use chirpsqueeze::validate::{
    max_evenness_residual, max_unitarity_residual, oracle_equivalence, reference_crystal,
    sample_detunings,
};

#[test]
fn identities_hold_but_band_drifts() {
    let good = reference_crystal(SellmeierModel::lithium_niobate_extraordinary(), 0.146).unwrap();
    let mut bad = good.clone();
    bad.sellmeier.b_um2[0] *= 1.3;
    bad.sellmeier.label = "corrupted".into();

    let grid = DetuningGrid::covering(&good, None, 1 << 12).unwrap();
    let ref_edges = optical_half_max_edges_um(&compute_spectra(&good, &grid).unwrap()).unwrap();

    let grid = DetuningGrid::covering(&bad, None, 1 << 12).unwrap();
    let s = compute_spectra(&bad, &grid).unwrap();
    assert!(max_unitarity_residual(&s) < 1e-8);
    assert!(max_evenness_residual(&s) < 1e-8);
    let err = oracle_equivalence(
        &bad,
        &sample_detunings(&grid, 6),
        &IntegrationSettings::default(),
    )
    .unwrap();
    assert!(err < 1e-6, "{err}");

    let edges = optical_half_max_edges_um(&s).unwrap();
    let drift = (edges.0 / ref_edges.0 - 1.0)
        .abs()
        .max((edges.1 / ref_edges.1 - 1.0).abs());
    assert!(drift > 0.03, "edges {edges:?} vs {ref_edges:?}");
}
