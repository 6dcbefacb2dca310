use std::time::Instant;
use syz_core::ideal::CoxRing;
use syz_core::witness::WitnessEngine;
use syz_core::{PrimeField, Setting};

#[test]
fn dbg_sweep() {
    let s = Setting::new((1, 2), (3, 3), (0, 0), 32003).unwrap();
    let r = CoxRing::new(s, PrimeField::new(32003));
    let eng = WitnessEngine::new(&r, 200_000);
    // q = 2 over [6, 31]: which (k, p) verify by rank?
    for p in 6..=31u32 {
        let mut line = format!("q=2 p={p}:");
        for k in [1usize, 2] {
            let t0 = Instant::now();
            let tag = match eng.construct_witness(2, k, p) {
                Ok(w) => match eng.verify_witness(&w) {
                    Ok(fl) if fl.is_valid() => format!(" k{k}:OK({}ms)", t0.elapsed().as_millis()),
                    Ok(fl) => format!(" k{k}:flags(nz={},cy={},cb={})", fl.nonzero, fl.cocycle, fl.coboundary),
                    Err(e) => format!(" k{k}:verr({})", short(&e.to_string())),
                },
                Err(e) => format!(" k{k}:cerr({})", short(&e.to_string())),
            };
            line.push_str(&tag);
        }
        println!("{line}");
    }
    // q = 1 over [1, 25].
    for p in 1..=25u32 {
        let mut line = format!("q=1 p={p}:");
        for k in [0usize, 1] {
            let t0 = Instant::now();
            let tag = match eng.construct_witness(1, k, p) {
                Ok(w) => match eng.verify_witness(&w) {
                    Ok(fl) if fl.is_valid() => format!(" k{k}:OK({}ms)", t0.elapsed().as_millis()),
                    Ok(fl) => format!(" k{k}:flags(nz={},cy={},cb={})", fl.nonzero, fl.cocycle, fl.coboundary),
                    Err(e) => format!(" k{k}:verr({})", short(&e.to_string())),
                },
                Err(e) => format!(" k{k}:cerr({})", short(&e.to_string())),
            };
            line.push_str(&tag);
        }
        println!("{line}");
    }
    // q = 3, (3, 2): the full ring is its own key case; anchor p = 35.
    for p in [35u32] {
        let t0 = Instant::now();
        match eng.construct_witness(3, 2, p) {
            Ok(w) => match eng.verify_witness(&w) {
                Ok(fl) => println!("q=3 k=2 p={p}: nz={} cy={} cb={} ({}ms)", fl.nonzero, fl.cocycle, fl.coboundary, t0.elapsed().as_millis()),
                Err(e) => println!("q=3 k=2 p={p}: verr {e}"),
            },
            Err(e) => println!("q=3 k=2 p={p}: cerr {e}"),
        }
    }
}

fn short(s: &str) -> String {
    s.chars().take(40).collect()
}
