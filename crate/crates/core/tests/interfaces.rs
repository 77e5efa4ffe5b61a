use hdrelay_core::gaussian::line::{line_fixed_power, line_waterfill, LineNetworkGains};
use hdrelay_core::gaussian::{parse_network, random_network, to_json, RandomSpec};
use hdrelay_core::linalg::CMatrix;
use hdrelay_core::model::{self, cplx, NodeLayout};
use hdrelay_core::scheduler::{solve_saddle, verify_schedule, SolveOptions};
use hdrelay_core::{CutValueTable, Switching};

fn to_f32(net: &hdrelay_core::NetworkSpec) -> model::NetworkSpec<f32> {
    let h = net.channel();
    let rows = (0..h.rows())
        .map(|i| (0..h.cols()).map(|j| cplx::<f32>(h[(i, j)].re, h[(i, j)].im)).collect())
        .collect();
    model::NetworkSpec::new(net.layout().clone(), CMatrix::from_rows(rows).unwrap()).unwrap()
}

#[test]
fn single_precision_tracks_double() {
    for seed in 0..10 {
        let net = random_network(&RandomSpec::single_antenna(4, Switching::Lockstep), seed).unwrap();
        let r64 = solve_saddle(&CutValueTable::from_network(&net).unwrap(), &SolveOptions::default()).unwrap();
        let t32 = model::CutValueTable::from_network(&to_f32(&net)).unwrap();
        let opts = SolveOptions {
            tol: 1e-4,
            ..SolveOptions::default()
        };
        let r32 = solve_saddle(&t32, &opts).unwrap();
        assert!((r32.rate as f64 - r64.rate).abs() < 1e-3 * r64.rate.max(1.0), "seed {seed}");
        assert!(r32.schedule.support().len() <= 5);
        let v = verify_schedule(&t32, &r32.schedule).unwrap();
        assert!(v.achieved_rate >= r32.rate - 1e-3);
    }
}

#[test]
fn file_round_trip_preserves_solution() {
    let spec = RandomSpec {
        m_source: 2,
        m_relay: vec![1, 2, 1],
        m_dest: 1,
        switching: Switching::Independent,
    };
    let net = random_network(&spec, 42).unwrap();
    let text = to_json(&net);
    let again = parse_network(&text).unwrap();
    assert_eq!(net, again);
    assert_eq!(to_json(&again), text);
    let a = solve_saddle(&CutValueTable::from_network(&net).unwrap(), &SolveOptions::default()).unwrap();
    let b = solve_saddle(&CutValueTable::from_network(&again).unwrap(), &SolveOptions::default()).unwrap();
    assert_eq!(a.rate, b.rate);
    assert_eq!(a.schedule, b.schedule);
    assert!(a.schedule.support().len() <= 4);
}

#[test]
fn relay_relabeling_keeps_the_rate() {
    let net = random_network(&RandomSpec::single_antenna(5, Switching::Lockstep), 9).unwrap();
    let perm = net.permute_relays(&[3, 0, 4, 1, 2]).unwrap();
    let a = solve_saddle(&CutValueTable::from_network(&net).unwrap(), &SolveOptions::default()).unwrap();
    let b = solve_saddle(&CutValueTable::from_network(&perm).unwrap(), &SolveOptions::default()).unwrap();
    assert!((a.rate - b.rate).abs() < 1e-7 * a.rate.max(1.0));
}

#[test]
fn lockstep_is_never_better_than_independent() {
    let layout = NodeLayout::new(1, vec![2, 1], 1, Switching::Independent).unwrap();
    assert_eq!(layout.num_states(), 8);
    for seed in 0..5 {
        let mut spec = RandomSpec {
            m_source: 1,
            m_relay: vec![2, 1],
            m_dest: 1,
            switching: Switching::Independent,
        };
        let ind = random_network(&spec, seed).unwrap();
        spec.switching = Switching::Lockstep;
        let lock = random_network(&spec, seed).unwrap();
        assert_eq!(ind.channel(), lock.channel());
        let ri = solve_saddle(&CutValueTable::from_network(&ind).unwrap(), &SolveOptions::default()).unwrap();
        let rl = solve_saddle(&CutValueTable::from_network(&lock).unwrap(), &SolveOptions::default()).unwrap();
        assert!(ri.rate >= rl.rate - 1e-7);
    }
}

#[test]
fn line_waterfill_general_path_on_fixture() {
    let g = LineNetworkGains::crossed(3.0);
    let w = line_waterfill(&g, 100).unwrap();
    let fixed = line_fixed_power(&g).unwrap().c_case_i;
    assert!(w.c_wf_case_i >= fixed - 1.0 && w.c_wf_case_i <= fixed + 2.0);
}
