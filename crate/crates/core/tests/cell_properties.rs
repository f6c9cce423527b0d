use firing_cell::{Arrival, CellParams, FiringCell, SynapseKind};
use proptest::prelude::*;

fn layout_strategy() -> impl Strategy<Value = Vec<SynapseKind>> {
    prop::collection::vec(
        prop_oneof![3 => Just(SynapseKind::Excitatory), 1 => Just(SynapseKind::Inhibitory)],
        1..=16,
    )
}

/// Per tick, the compartments receiving a spike.
fn schedule_strategy(max_ticks: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0usize..16, 0..6), 1..max_ticks)
}

fn arrivals(tick: &[usize], n: usize) -> Vec<Arrival> {
    tick.iter().map(|&c| Arrival::new(c % n)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn spike_clears_every_psp_register(
        layout in layout_strategy(),
        schedule in schedule_strategy(200),
        enhancement in 1.0f64..6.0,
    ) {
        let params = CellParams { epsp_enhancement: enhancement, ..CellParams::default() };
        let mut cell = FiringCell::new(&params, &layout).unwrap();
        for tick in &schedule {
            if cell.step(&arrivals(tick, layout.len())).spike {
                prop_assert!(cell.compartments().iter().all(|c| c.psp_register().is_zero()));
                prop_assert_eq!(cell.body_potential(), cell.v_rest());
            }
        }
    }

    #[test]
    fn potentials_never_fall_below_reversal(
        layout in layout_strategy(),
        schedule in schedule_strategy(200),
        ipsp in 1.0f64..20.0,
    ) {
        let params = CellParams { ipsp_enhancement: ipsp, ..CellParams::default() };
        let mut cell = FiringCell::new(&params, &layout).unwrap();
        for tick in &schedule {
            let out = cell.step(&arrivals(tick, layout.len()));
            prop_assert!(out.v_body >= cell.e_k());
            for i in 0..layout.len() {
                prop_assert!(cell.local_potential(i) >= cell.e_k());
            }
        }
    }

    #[test]
    fn arrival_order_within_a_tick_is_irrelevant(
        layout in layout_strategy(),
        schedule in schedule_strategy(150),
    ) {
        let params = CellParams::default();
        let mut forward = FiringCell::new(&params, &layout).unwrap();
        let mut reversed = forward.clone();
        for tick in &schedule {
            let a = arrivals(tick, layout.len());
            let mut b = a.clone();
            b.reverse();
            prop_assert_eq!(forward.step(&a), reversed.step(&b));
            prop_assert_eq!(forward.compartments(), reversed.compartments());
        }
    }

    #[test]
    fn stepping_is_deterministic(layout in layout_strategy(), schedule in schedule_strategy(150)) {
        let params = CellParams::default();
        let mut a = FiringCell::new(&params, &layout).unwrap();
        let mut b = FiringCell::new(&params, &layout).unwrap();
        for tick in &schedule {
            let arr = arrivals(tick, layout.len());
            prop_assert_eq!(a.step(&arr), b.step(&arr));
        }
        prop_assert_eq!(a.compartments(), b.compartments());
    }

    #[test]
    fn memory_requires_an_open_gate(layout in layout_strategy(), schedule in schedule_strategy(200)) {
        // 0.01 mV base PSP: no compartment can reach the gate
        let params = CellParams { n_inputs: Some(4000), ..CellParams::default() };
        let mut cell = FiringCell::new(&params, &layout).unwrap();
        for tick in &schedule {
            cell.step(&arrivals(tick, layout.len()));
            for i in 0..layout.len() {
                prop_assert!(cell.local_potential(i) < params.ltp.gate_mv);
            }
            prop_assert!(cell.memories().all(|m| m == 0.0));
        }
    }

    #[test]
    fn multiplier_stays_within_cap(layout in layout_strategy(), schedule in schedule_strategy(300)) {
        let params = CellParams { epsp_enhancement: 4.0, ..CellParams::default() };
        let mut cell = FiringCell::new(&params, &layout).unwrap();
        let cap = 1.0 + params.ltp.strength_cap;
        for tick in &schedule {
            cell.step(&arrivals(tick, layout.len()));
            for i in 0..layout.len() {
                let m = cell.potentiation_multiplier(i);
                prop_assert!((1.0..=cap).contains(&m));
                prop_assert!(cell.compartments()[i].memory() >= 0.0);
            }
        }
    }
}

#[test]
fn dense_excitation_opens_the_gate() {
    let params = CellParams::default();
    let mut cell = FiringCell::new(&params, &[SynapseKind::Excitatory; 4]).unwrap();
    for _ in 0..4 {
        cell.step(&[Arrival::new(1), Arrival::new(2)]);
    }
    assert!(cell.memories().any(|m| m > 0.0));
}
