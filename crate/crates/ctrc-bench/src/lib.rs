//! Shared fixtures for the benchmarks.

use ctrc_core::cctrs::{Cctrs, ValidateMode};

pub const EVEN: &str = "\
(VAR x)
(RULES
  even(0) -> true
  even(s(x)) -> true | odd(x) == true
  even(s(x)) -> false | even(x) == true
  odd(0) -> false
  odd(s(x)) -> true | even(x) == true
  odd(s(x)) -> false | odd(x) == true
)";

pub const FIB: &str = "\
(VAR x y z w)
(RULES
  plus(0, y) -> y
  plus(s(x), y) -> s(plus(x, y))
  fib(0) -> pair(0, s(0))
  fib(s(x)) -> pair(z, w) | fib(x) == pair(y, z), plus(y, z) == w
)";

pub fn system(text: &str) -> Cctrs {
    Cctrs::parse(text, ValidateMode::Strong).unwrap()
}

pub fn tower(head: &str, n: usize) -> String {
    let mut t = "0".to_string();
    for _ in 0..n {
        t = format!("s({t})");
    }
    format!("{head}({t})")
}
