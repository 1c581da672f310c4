//! Workload builders shared by the benchmarks.

use dmtl_core::*;

pub const TRIP_PROGRAM: &str = "ActivePowerTrip(v) :- Turbine(v), ALWAYS-[0,1m] ActivePowerBelow015(v), \
SOMETIME-[60s,63s] ALWAYS-[0s,10s] ActivePowerAbove15(v).";

/// `turbines` turbines, each tripping `cycles` times, ten minutes apart.
pub fn trip_data(turbines: usize, cycles: usize) -> DataInstance {
    let mut text = String::new();
    for t in 0..turbines {
        text.push_str(&format!("Turbine(tb{t})@(-inf,inf).\n"));
        for c in 0..cycles {
            let base = 600 * c as i64;
            text.push_str(&format!("ActivePowerAbove15(tb{t})@[{base},{}).\n", base + 15));
            text.push_str(&format!("ActivePowerBelow015(tb{t})@[{},{}).\n", base + 17, base + 85));
        }
    }
    parse_data(&text).expect("generated data parses")
}

pub fn trip_program() -> Program {
    normalize(&parse_program(TRIP_PROGRAM).expect("program parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_cycle_trips() {
        let m = eval_nonrecursive(&trip_program(), &trip_data(2, 3)).unwrap();
        let q = parse_query("ActivePowerTrip(v)").unwrap();
        assert_eq!(answers(&m, &q).unwrap().len(), 6);
    }
}
