//! FDC and RIE for every registered base function.

use metade::landscape::{characterize, LandscapeSettings};
use metade::problems::{lookup, Function};

fn main() -> metade::Result<()> {
    let settings = LandscapeSettings {
        samples: 5000,
        ..Default::default()
    };
    println!("{:<16} {:>8} {:>8}", "problem", "fdc", "rie");
    for f in Function::ALL {
        for name in [f.name().to_string(), format!("{}@rot", f.name())] {
            let r = characterize(&lookup(&name, 10, 0)?, &settings)?;
            println!("{:<16} {:>8.4} {:>8.4}", r.problem, r.fdc, r.rie);
        }
    }
    Ok(())
}
