//! Systems shared by the unit tests.

pub(crate) const EVEN: &str = "\
(VAR x)
(RULES
  even(0) -> true
  even(s(x)) -> true | odd(x) == true
  even(s(x)) -> false | even(x) == true
  odd(0) -> false
  odd(s(x)) -> true | even(x) == true
  odd(s(x)) -> false | odd(x) == true
)";

pub(crate) const FG: &str = "\
(VAR x)
(RULES
  f(x) -> x
  g(x) -> a | x == b
)";

pub(crate) const FIB: &str = "\
(CONDITIONTYPE ORIENTED)
(VAR x y z w)
(RULES
  plus(0, y) -> y
  plus(s(x), y) -> s(plus(x, y))
  fib(0) -> pair(0, s(0))
  fib(s(x)) -> pair(z, w) | fib(x) == pair(y, z), plus(y, z) == w
)";

pub(crate) const LOOP: &str = "(VAR x)\n(RULES a -> b | a == b)";
