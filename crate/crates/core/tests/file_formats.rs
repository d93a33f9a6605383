use proptest::prelude::*;
use spinforge::io::{parse_matrix, parse_pulse, parse_program, parse_spin_system, write_matrix, write_program, write_pulse, write_spin_system};
use spinforge::linalg::{c, CMatrix};
use spinforge::prop::{ChannelControls, ChannelProgram, PulseProgram};
use spinforge::refocus::{ProgramOp, RefocusProgram};
use spinforge::{Spin, SpinSystem};

fn controls() -> impl Strategy<Value = (usize, Vec<(u8, Vec<[f64; 2]>, f64)>)> {
    (1usize..8).prop_flat_map(|n| {
        let ch = (0u8..3, prop::collection::vec([-1e5f64..1e5, -720f64..720.0], n), 0f64..1e5);
        (Just(n), prop::collection::vec(ch, 0..3))
    })
}

fn program_from(tau: f64, n: usize, chans: Vec<(u8, Vec<[f64; 2]>, f64)>) -> PulseProgram {
    let channels = chans
        .into_iter()
        .enumerate()
        .map(|(k, (mode, vals, amp))| ChannelProgram {
            species: format!("X{k}"),
            controls: match mode {
                0 => ChannelControls::Xy(vals),
                1 => ChannelControls::AmpPhase(vals.iter().map(|v| [v[0].abs(), v[1].to_radians()]).collect()),
                _ => ChannelControls::PhaseOnly {
                    amp_hz: amp,
                    phases: vals.iter().map(|v| v[1].to_radians()).collect(),
                },
            },
        })
        .collect();
    PulseProgram::new(tau, n, channels).unwrap()
}

proptest! {
    #[test]
    fn pulse_file_rewrites_identically(tau in 1e-7f64..1e-3, (n, chans) in controls()) {
        let p = program_from(tau, n, chans);
        let first = write_pulse(&p);
        let back = parse_pulse(&first, "p").unwrap();
        prop_assert_eq!(&write_pulse(&back), &first);
        // Values agree to the 9 significant digits written.
        for j in 0..n {
            for (a, b) in p.channels().iter().zip(back.channels()) {
                let (x0, y0) = a.controls.xy(j);
                let (x1, y1) = b.controls.xy(j);
                let scale = 1e5;
                prop_assert!((x0 - x1).abs() <= 1e-7 * scale && (y0 - y1).abs() <= 1e-7 * scale);
            }
        }
    }

    #[test]
    fn matrix_file_is_exact(n in 1usize..6, vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 36)) {
        let m = CMatrix::from_fn(n, n, |i, j| { let (re, im) = vals[i * 6 + j]; c(re, im) });
        prop_assert_eq!(parse_matrix(&write_matrix(&m), "m").unwrap(), m);
    }

    #[test]
    fn program_file_is_exact(ops in prop::collection::vec((any::<bool>(), 0usize..4, 0f64..1.0, -360f64..360.0), 0..20)) {
        let p = RefocusProgram {
            n_spins: 4,
            ops: ops.into_iter().map(|(d, s, t, ph)| if d { ProgramOp::Delay(t) } else { ProgramOp::Pulse180 { spin: s, phase_deg: ph } }).collect(),
        };
        prop_assert_eq!(parse_program(&write_program(&p), "p", 4).unwrap(), p);
    }

    #[test]
    fn spin_file_rewrites_identically(
        offs in prop::collection::vec(-1e4f64..1e4, 1..6),
        js in prop::collection::vec(-300f64..300.0, 15),
        hetero in any::<bool>(),
    ) {
        let q = offs.len();
        let spins: Vec<Spin> = offs.iter().enumerate()
            .map(|(k, &o)| { let sp = if hetero && k % 2 == 1 { "C" } else { "H" }; Spin::new(format!("{sp}{}", k + 1), sp, o) })
            .collect();
        let mut couplings = Vec::new();
        let mut idx = 0;
        for i in 0..q { for j in i + 1..q { couplings.push(((i, j), js[idx])); idx += 1; } }
        let sys = SpinSystem::new(spins, couplings).unwrap();
        let first = write_spin_system(&sys);
        let back = parse_spin_system(&first, "s").unwrap();
        prop_assert_eq!(&write_spin_system(&back), &first);
        prop_assert_eq!(back.len(), q);
    }
}
