use std::fmt::Write;

use super::{LinearProgram, Relation, Sense};
use crate::Scalar;

/// Number text accepted by LP readers: plain decimal in the usual range,
/// exponent notation for very small or very large magnitudes.
fn num<T: Scalar>(x: T) -> String {
    let a = x.abs();
    if a == T::zero() || (a >= T::lit(1e-6) && a <= T::lit(1e15)) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn linear<T: Scalar>(lp: &LinearProgram<T>, coeffs: &[(crate::piecewise::VarId, T)]) -> String {
    let mut s = String::new();
    for (i, &(v, c)) in coeffs.iter().enumerate() {
        let name = &lp.variables()[v.0].name;
        let (sign, mag) = if c < T::zero() { ("-", -c) } else { ("+", c) };
        if i == 0 {
            let lead = if sign == "-" { "- " } else { "" };
            let _ = write!(s, "{lead}{} {name}", num(mag));
        } else {
            let _ = write!(s, " {sign} {} {name}", num(mag));
        }
    }
    s
}

/// CPLEX-style LP text with rows named `c1, c2, …` in insertion order.
///
/// A nonzero objective constant is written as a trailing term of the
/// objective row, which CPLEX and HiGHS both read as an offset.
pub fn export_lp_text<T: Scalar>(lp: &LinearProgram<T>) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let mut obj = if lp.objective().is_empty() {
        lp.variables().first().map_or(String::new(), |v| format!("0 {}", v.name))
    } else {
        linear(lp, lp.objective())
    };
    let k = lp.objective_constant();
    if k != T::zero() {
        let (sign, mag) = if k < T::zero() { ("-", -k) } else { ("+", k) };
        let _ = write!(obj, " {sign} {}", num(mag));
    }
    let _ = writeln!(out, " obj: {obj}");
    out.push_str("Subject To\n");
    for (i, row) in lp.constraints().iter().enumerate() {
        let lhs = if row.coeffs.is_empty() {
            lp.variables().first().map_or(String::from("0"), |v| format!("0 {}", v.name))
        } else {
            linear(lp, &row.coeffs)
        };
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " c{}: {lhs} {rel} {}", i + 1, num(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in lp.variables() {
        match v.lower {
            None => {
                let _ = writeln!(out, " {} free", v.name);
            }
            Some(l) if l == T::zero() => {
                let _ = writeln!(out, " {} >= 0", v.name);
            }
            Some(l) => {
                let _ = writeln!(out, " {} >= {}", v.name, num(l));
            }
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
pub(super) fn num_for_tests(x: f64) -> String {
    num(x)
}
