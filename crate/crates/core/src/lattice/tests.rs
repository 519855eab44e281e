use super::*;

fn ring_is_clean(arr: &Arrangement) {
    let diags = validate(arr);
    assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
}

#[test]
fn plain_wire_with_head() {
    let arr = build_wire(5, &[], true).unwrap();
    let species: Vec<Species> = arr.units().iter().map(|u| u.species).collect();
    assert_eq!(
        species,
        vec![Species::A, Species::B, Species::A, Species::B, Species::A]
    );
    assert!(arr.unit(0).is_superatom());
    assert!(matches!(arr.unit(0).role, Role::Head { wire: 0 }));
    assert!(arr.units()[1..].iter().all(|u| !u.is_superatom()));
    ring_is_clean(&arr);
}

#[test]
fn wire_without_head_has_plain_site_zero() {
    let arr = build_wire(6, &[4], false).unwrap();
    assert!(!arr.unit(0).is_superatom());
    assert!(arr.unit(4).is_superatom());
}

#[test]
fn superatom_spacing_rules() {
    assert!(matches!(
        build_wire(10, &[4, 6], true),
        Err(Error::SpacingViolation {
            first: 4,
            second: 6,
            ..
        })
    ));
    let ok = build_wire(10, &[4, 8], true).unwrap();
    assert_eq!(ok.units().iter().filter(|u| u.is_superatom()).count(), 3);
    ring_is_clean(&ok);
    // The head counts too.
    assert!(matches!(
        build_wire(10, &[2], true),
        Err(Error::SpacingViolation { .. })
    ));
    assert!(matches!(
        build_wire(10, &[5], true),
        Err(Error::ParityViolation { site: 5, .. })
    ));
    assert!(matches!(
        build_wire(4, &[], true),
        Err(Error::InvalidLayout(_))
    ));
}

#[test]
fn wire_adjacency_is_a_path() {
    let arr = build_wire(12, &[4, 8], true).unwrap();
    let g = blockade_graph(&arr).unwrap();
    let ug = g.unit_graph();
    for a in 0..12usize {
        for b in 0..12 {
            let expected = a != b && a.abs_diff(b) == 1;
            assert_eq!(ug.is_adjacent(a, b), expected, "sites {a}, {b}");
        }
    }
}

#[test]
fn single_gate_circuit_layout() {
    let plan = PlacementPlan {
        n_wires: 1,
        wire_length: 7,
        placements: vec![Placement {
            gate: 0,
            device: Device::SingleQubit { wire: 0, site: 4 },
        }],
    };
    let (arr, map) = build_circuit_arrangement(&plan).unwrap();
    let sup: Vec<usize> = arr
        .units()
        .iter()
        .filter(|u| u.is_superatom())
        .map(|u| u.role.wire_site().unwrap().1)
        .collect();
    assert_eq!(sup, vec![0, 4]);
    assert_eq!(map[&0], arr.site_unit(0, 4).unwrap());
    ring_is_clean(&arr);
}

#[test]
fn coupler_touches_both_wires_at_its_site() {
    let plan = PlacementPlan {
        n_wires: 2,
        wire_length: 9,
        placements: vec![Placement {
            gate: 0,
            device: Device::Coupler { upper: 0, site: 6 },
        }],
    };
    let (arr, map) = build_circuit_arrangement(&plan).unwrap();
    ring_is_clean(&arr);
    let g = blockade_graph(&arr).unwrap();
    let c = map[&0];
    let expected = vec![arr.site_unit(0, 6).unwrap(), arr.site_unit(1, 6).unwrap()];
    assert_eq!(g.unit_graph().neighbors(c), expected.as_slice());
}

#[test]
fn placement_errors() {
    let coupler_odd = PlacementPlan {
        n_wires: 2,
        wire_length: 9,
        placements: vec![Placement {
            gate: 0,
            device: Device::Coupler { upper: 0, site: 5 },
        }],
    };
    assert!(matches!(
        build_circuit_arrangement(&coupler_odd),
        Err(Error::CouplerParityViolation { site: 5 })
    ));
    let overlap = PlacementPlan {
        n_wires: 1,
        wire_length: 9,
        placements: vec![
            Placement {
                gate: 0,
                device: Device::SingleQubit { wire: 0, site: 4 },
            },
            Placement {
                gate: 1,
                device: Device::SingleQubit { wire: 0, site: 4 },
            },
        ],
    };
    assert!(matches!(
        build_circuit_arrangement(&overlap),
        Err(Error::OverlapViolation { .. })
    ));
    let shared_wire = PlacementPlan {
        n_wires: 3,
        wire_length: 9,
        placements: vec![
            Placement {
                gate: 0,
                device: Device::Coupler { upper: 0, site: 4 },
            },
            Placement {
                gate: 1,
                device: Device::Coupler { upper: 1, site: 4 },
            },
        ],
    };
    assert!(matches!(
        build_circuit_arrangement(&shared_wire),
        Err(Error::OverlapViolation { .. })
    ));
}

#[test]
fn same_site_gates_on_different_wires_are_structurally_fine() {
    let plan = PlacementPlan {
        n_wires: 2,
        wire_length: 7,
        placements: vec![
            Placement {
                gate: 0,
                device: Device::SingleQubit { wire: 0, site: 4 },
            },
            Placement {
                gate: 1,
                device: Device::SingleQubit { wire: 1, site: 4 },
            },
        ],
    };
    let (arr, _) = build_circuit_arrangement(&plan).unwrap();
    ring_is_clean(&arr);
}

#[test]
fn universal_layout_counts() {
    let one = build_universal_arrangement(1).unwrap();
    ring_is_clean(&one);
    assert_eq!(one.couplers().count(), 0);
    assert_eq!(one.devices().len(), 1);
    assert_eq!(universal_atom_formula(1, 4), one.atom_count() as i64);

    assert_eq!(universal_atom_formula(2, 4), 34);
    assert_eq!(universal_atom_formula(4, 4), 88);
    for n in 2..=4 {
        let arr = build_universal_arrangement(n).unwrap();
        ring_is_clean(&arr);
        assert_eq!(arr.couplers().count(), n - 1);
        assert_eq!(arr.devices().len(), 2 * n - 1);
        let sites: BTreeSet<usize> = arr.devices().iter().map(Device::site).collect();
        assert_eq!(sites.len(), 2 * n - 1, "every device has its own site");
    }
}

#[test]
fn universal_count_is_quadratic() {
    // Second finite differences of a quadratic are constant. A single qubit
    // has no coupler row, so the sequence starts at two.
    let counts: Vec<i64> = (2..=9)
        .map(|n| build_universal_arrangement(n).unwrap().atom_count() as i64)
        .collect();
    let second: Vec<i64> = counts.windows(3).map(|w| w[2] - 2 * w[1] + w[0]).collect();
    assert!(
        second.iter().all(|&d| d == second[0] && d > 0),
        "{counts:?}"
    );
}

#[test]
fn distance_threshold_defines_blockade() {
    let mk = |x: f64| {
        let units = vec![
            Unit {
                id: 0,
                species: Species::A,
                kind: UnitKind::Atom,
                size: 1,
                position: [0.0, 0.0],
                role: Role::Wire { wire: 0, site: 0 },
            },
            Unit {
                id: 1,
                species: Species::B,
                kind: UnitKind::Atom,
                size: 1,
                position: [x, 0.0],
                role: Role::Wire { wire: 0, site: 1 },
            },
        ];
        Arrangement::from_units(units, 1.0, 4).unwrap()
    };
    assert!(blockade_graph(&mk(0.5))
        .unwrap()
        .unit_graph()
        .is_adjacent(0, 1));
    assert!(!blockade_graph(&mk(2.0))
        .unwrap()
        .unit_graph()
        .is_adjacent(0, 1));
}

#[test]
fn validate_flags_cross_wire_driven_adjacency() {
    let mut arr = build_circuit_arrangement(&PlacementPlan {
        n_wires: 2,
        wire_length: 6,
        placements: vec![],
    })
    .unwrap()
    .0;
    // Drag wire 1's site 2 onto wire 0's site 2.
    let target = arr.site_unit(0, 2).unwrap();
    let moved = arr.site_unit(1, 2).unwrap();
    let mut units = arr.units().to_vec();
    units[moved].position = [units[target].position[0], units[target].position[1] + 0.5];
    arr = Arrangement::from_units(units, 1.0, 4).unwrap();
    let diags = validate(&arr);
    assert!(diags.contains(&Diagnostic::DrivenAdjacency {
        a: target.min(moved),
        b: target.max(moved)
    }));
}

#[test]
fn validate_flags_partial_superatom_overlap() {
    let arr = build_wire(6, &[4], true).unwrap();
    let mut units = arr.units().to_vec();
    // Put site 5 exactly at R_B from the superatom centre: half its atoms fall inside.
    let c = units[4].position;
    units[5].position = [c[0] + 1.0, c[1]];
    let arr = Arrangement::from_units(units, 1.0, 4).unwrap();
    let diags = validate(&arr);
    assert!(diags.iter().any(|d| matches!(
        d,
        Diagnostic::PartialSuperatomOverlap {
            superatom: 4,
            other: 5
        }
    )));
    assert!(matches!(
        blockade_graph(&arr),
        Err(Error::PartialSuperatomOverlap {
            superatom: 4,
            other: 5
        })
    ));
}

#[test]
fn generated_geometry_keeps_margins() {
    let arr = build_universal_arrangement(3).unwrap();
    let g = blockade_graph(&arr).unwrap();
    let ug = g.unit_graph();
    for a in 0..arr.units().len() {
        for b in (a + 1)..arr.units().len() {
            let d = distance(arr.unit(a).position, arr.unit(b).position);
            if ug.is_adjacent(a, b) {
                assert!(d <= 0.8 + 1e-12, "{a}-{b} at {d}");
            } else {
                assert!(d >= 1.2 - 1e-12, "{a}-{b} at {d}");
            }
        }
    }
}

#[test]
fn json_round_trip() {
    let arr = build_universal_arrangement(2).unwrap();
    let text = arr.to_json(None).unwrap();
    let back = Arrangement::from_json(&text).unwrap();
    assert_eq!(arr, back);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["version", "S", "blockade_radius", "units"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let u = &v["units"][0];
    for key in ["id", "species", "kind", "size", "x", "y", "role"] {
        assert!(u.get(key).is_some(), "missing unit field {key}");
    }
}

#[test]
fn svg_is_deterministic() {
    let arr = build_universal_arrangement(2).unwrap();
    let a = render_svg(&arr, SvgOptions { edges: true }, Some("test"));
    let b = render_svg(&arr, SvgOptions { edges: true }, Some("test"));
    assert_eq!(a, b);
    assert_eq!(a.matches(r#"class="superatom""#).count(), 5);
    assert_eq!(a.matches(r#"data-role="head""#).count(), 2);
    assert_eq!(a.matches(r#"data-role="device""#).count(), 2);
    assert_eq!(a.matches(r#"data-role="coupler""#).count(), 1);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn quotient_consistency(
            n in 2usize..=3,
            length in 7usize..=16,
            seeds in proptest::collection::vec(0usize..100, 0..4),
        ) {
            // Random coupler and superatom placements that respect the spacing rules.
            let mut placements = Vec::new();
            let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
            for (i, s) in seeds.iter().enumerate() {
                let site = 4 + 2 * (s % ((length - 5) / 2).max(1));
                if site + 1 >= length { continue; }
                let wire = s % n;
                let free = |w: usize, used: &Vec<BTreeSet<usize>>| used[w].iter().all(|&k| k.abs_diff(site) >= 4);
                if i % 2 == 0 && free(wire, &used) {
                    used[wire].insert(site);
                    placements.push(Placement { gate: i, device: Device::SingleQubit { wire, site } });
                } else if wire + 1 < n && free(wire, &used) && free(wire + 1, &used) {
                    used[wire].insert(site);
                    used[wire + 1].insert(site);
                    placements.push(Placement { gate: i, device: Device::Coupler { upper: wire, site } });
                }
            }
            let plan = PlacementPlan { n_wires: n, wire_length: length, placements };
            let (arr, _) = build_circuit_arrangement(&plan).unwrap();
            prop_assert!(validate(&arr).is_empty());
            let g1 = blockade_graph(&arr).unwrap();
            let g2 = blockade_graph(&arr).unwrap();
            prop_assert_eq!(&g1, &g2);
            let q = g1.quotient_of_physical();
            for (u, ns) in q.iter().enumerate() {
                prop_assert_eq!(ns.as_slice(), g1.unit_graph().neighbors(u));
                for &v in g1.unit_graph().neighbors(u) {
                    prop_assert!(g1.unit_graph().is_adjacent(v, u));
                    prop_assert!(u != v);
                }
            }
        }
    }
}
