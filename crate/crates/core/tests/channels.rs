use ampbench::channels::{simulated_average_fidelity, ChannelSpec, SimulationDims};
use ampbench::closed_forms::{cft, f_squeeze_opt, f_squeeze_r};
use ampbench::fock::{coherent_state, FockDim};
use ampbench::montecarlo::mc_cft_displaced;
use ampbench::Complex64;

fn dim(d: usize) -> FockDim {
    FockDim::new(d).unwrap()
}

#[test]
fn simulated_squeezer_matches_closed_form() {
    for (g, lambda) in [(1.5, 3.0), (2.0, 5.0)] {
        let r = f_squeeze_opt(g, lambda).unwrap().r_opt;
        let sim = simulated_average_fidelity(&ChannelSpec::Squeezer { r }, g, lambda, dim(40), 24, None).unwrap();
        let exact = f_squeeze_r(g, lambda, r).unwrap();
        assert!((sim - exact).abs() < 1e-6, "g={g} lambda={lambda}: {sim} vs {exact}");
    }
}

#[test]
fn rank_one_filter_reaches_threshold() {
    let (g, lambda) = (2.0, 3.0);
    let channel = ChannelSpec::Filter { x: 0.5, n_cut: 0 };
    let sim = simulated_average_fidelity(&channel, g, lambda, dim(30), 24, None).unwrap();
    assert!((sim - cft(g, lambda).unwrap()).abs() < 1e-9, "{sim}");
}

#[test]
fn channel_outputs_keep_trace() {
    let rho = coherent_state(Complex64::new(0.6, -0.2), dim(30)).projector();
    let dims = SimulationDims::default();
    for channel in [
        ChannelSpec::Squeezer { r: 0.4 },
        ChannelSpec::Attenuator { eta: 0.7 },
        ChannelSpec::MeasurePrepareHeterodyne { c: 0.8 },
    ] {
        let out = channel.apply(&rho, &dims).unwrap();
        assert!((out.success_probability - 1.0).abs() < 1e-6, "{channel:?}: {}", out.success_probability);
        assert!(out.state.is_hermitian());
    }
}

#[test]
fn displaced_prior_leaves_threshold_unchanged() {
    let est = mc_cft_displaced(2.0, 3.0, Complex64::new(1.5, -0.5), 200_000, 7).unwrap();
    assert!(est.within(cft(2.0, 3.0).unwrap(), 4.0), "{est:?}");
}
