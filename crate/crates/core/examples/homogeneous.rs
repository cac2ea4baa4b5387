//! Homogeneous surfing run on a small domain; prints the J trace.

use fracopt::{effective_toughness, run_surfing_simulation, Domain, InclusionLayout, SimulationConfig};
use std::time::Instant;

fn main() {
    env_logger::init();
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().unwrap());
    let lx = args.next().unwrap_or(40.0);
    let ly = args.next().unwrap_or(16.0);
    let target = args.next().unwrap_or(25.0);
    let mut cfg = SimulationConfig::default();
    cfg.domain = Domain { lx, ly };
    cfg.controls.target_crack_length = target;
    let start = Instant::now();
    let res = run_surfing_simulation(&InclusionLayout::empty(), &cfg).expect("simulation failed");
    for s in &res.trace.samples {
        println!("{:4} t={:.3} tip=({:.2},{:.2}) len={:.2} J={:.4} dofs={}", s.step, s.t, s.tip[0], s.tip[1], s.crack_length, s.j, s.n_dofs);
    }
    let g = effective_toughness(&res.trace, (15.0, target), 3);
    println!("g_eff = {g:?}; backtracks {} wall {:.1}s", res.backtracks, start.elapsed().as_secs_f64());
}
