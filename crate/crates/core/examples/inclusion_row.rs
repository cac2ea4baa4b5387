//! One row of stiff circular inclusions with period 15 near the crack plane.
//! Arguments: radius, first center x, vertical offset, max crack advance.

use fracopt::{effective_toughness, run_surfing_simulation, Domain, Ellipse, InclusionLayout, SimulationConfig};
use std::time::Instant;

fn main() {
    env_logger::init();
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().unwrap());
    let r = args.next().unwrap_or(2.5);
    let cx = args.next().unwrap_or(19.5);
    let cy = args.next().unwrap_or(0.0);
    let max_adv = args.next().unwrap_or(2.0);
    let mut cfg = SimulationConfig::default();
    cfg.domain = Domain { lx: 40.0, ly: 16.0 };
    cfg.controls.target_crack_length = 25.0;
    cfg.controls.max_crack_advance = max_adv;
    let ellipses = [cx, cx + 15.0].iter().map(|&x| Ellipse::new([x, cy], [r, r], 0.0)).collect();
    let layout = InclusionLayout { ellipses, rve: (15.0, 16.0), crack_offset: 0.0 };
    for e in &layout.ellipses {
        println!("inclusion at ({:.2}, {:.2}) radii {:?}", e.center[0], e.center[1], e.radii);
    }
    let start = Instant::now();
    let res = run_surfing_simulation(&layout, &cfg).expect("simulation failed");
    for s in &res.trace.samples {
        println!("{:4} t={:.3} tip=({:.2},{:.2}) len={:.2} J={:.4} dofs={}", s.step, s.t, s.tip[0], s.tip[1], s.crack_length, s.j, s.n_dofs);
    }
    let g = effective_toughness(&res.trace, (15.0, 25.0), 3);
    println!(
        "g_eff = {g:?}; backtracks {} violation {:.2e} range {:?} wall {:.1}s",
        res.backtracks,
        res.max_irreversibility_violation,
        res.alpha_range,
        start.elapsed().as_secs_f64()
    );
}
