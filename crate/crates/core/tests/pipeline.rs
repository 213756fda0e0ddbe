use walklab::growth::{growth_profile, minimal_a};
use walklab::product::{product_hellinger_ct, tensor_heat_distribution};
use walklab::walk::{hellinger_distance, mixing_time, spectral_gap, MixingTime, DEFAULT_SCAN_CAP};
use walklab::{Clock, GroupTable, Metric, ProductWalkSpec, WalkSpec, DEFAULT_ENUMERATION_CAP};

fn group(desc: &str) -> GroupTable {
    GroupTable::parse(desc, DEFAULT_ENUMERATION_CAP).unwrap()
}

#[test]
fn cycle_from_descriptor_to_mixing_time() {
    let g = group("Z:3");
    let gens = g.standard_generators();
    let w = WalkSpec::lazy_on(g, &gens).unwrap();
    let t = mixing_time(&w, Metric::Tv, Clock::Discrete, 0.1, DEFAULT_SCAN_CAP).unwrap();
    assert_eq!(t, MixingTime::Steps(2));
    assert!((spectral_gap(&w).unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn heisenberg_growth_is_moderate() {
    let g = group("H:5");
    let gens = walklab::GeneratorSet::new(&g, &g.standard_generators()).unwrap();
    let profile = growth_profile(&g, &gens).unwrap();
    assert_eq!(profile.group_order, 125);
    assert_eq!(*profile.volumes.last().unwrap(), 125);
    let a = minimal_a(&profile, 3.0);
    assert!((1.0..=48.0).contains(&a), "{a}");
}

#[test]
fn product_identity_matches_tensor_kernel() {
    let factors = vec![
        WalkSpec::lazy_cycle(3).unwrap(),
        WalkSpec::lazy_cycle(4).unwrap(),
    ];
    let pw = ProductWalkSpec::new(factors, vec![0.3, 0.7]).unwrap();
    for t in [0.0, 0.5, 2.0, 6.0] {
        let exact = product_hellinger_ct(&pw, t, 1e-13).unwrap();
        let tensor = hellinger_distance(&tensor_heat_distribution(&pw, t, 1e-13).unwrap());
        assert!((exact - tensor).abs() < 1e-9, "t={t}: {exact} vs {tensor}");
    }
}
