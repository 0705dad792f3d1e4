//! Scenario files configure accounts, catalog prices and breakdowns:
//!
//! ```text
//! budget A1 40
//! price R3 J11 5
//! breakdown R1#1 at 0
//! ```

use std::collections::BTreeMap;

use crate::analysis::InstanceId;
use crate::workflow::text::{directive_lines, ident, number};
use crate::workflow::ParseError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    /// Activity -> initial balance of each of its product agents.
    pub budgets: BTreeMap<String, i64>,
    /// (resource type, job) -> catalog price.
    pub prices: BTreeMap<(String, String), i64>,
    pub breakdowns: Vec<(InstanceId, u32)>,
}

fn units(line: usize, s: &str) -> Result<i64, ParseError> {
    s.parse().map_err(|_| ParseError {
        line,
        message: format!("expected an integer amount, found {s:?}"),
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut out = Scenario::default();
    for (line, f) in directive_lines(text) {
        let err = |message: String| ParseError { line, message };
        match f.as_slice() {
            ["budget", a, n] => {
                let n = units(line, n)?;
                if n < 0 {
                    return Err(err(format!("negative budget {n}")));
                }
                if out.budgets.insert(ident(line, a)?, n).is_some() {
                    return Err(err(format!("budget for {a} given twice")));
                }
            }
            ["price", r, j, n] => {
                let n = units(line, n)?;
                if n < 0 {
                    return Err(err(format!("negative price {n}")));
                }
                if out.prices.insert((ident(line, r)?, ident(line, j)?), n).is_some() {
                    return Err(err(format!("price for {r} {j} given twice")));
                }
            }
            ["breakdown", inst, "at", t] => {
                let id: InstanceId = inst.parse().map_err(err)?;
                ident(line, &id.resource)?;
                out.breakdowns.push((id, number(line, t)?));
            }
            _ => {
                return Err(err(format!(
                    "expected `budget`, `price` or `breakdown` directive, found {:?}",
                    f.join(" ")
                )))
            }
        }
    }
    Ok(out)
}

pub fn scenario_to_text(s: &Scenario) -> String {
    let mut out = String::new();
    for (a, n) in &s.budgets {
        out.push_str(&format!("budget {a} {n}\n"));
    }
    for ((r, j), n) in &s.prices {
        out.push_str(&format!("price {r} {j} {n}\n"));
    }
    for (id, t) in &s.breakdowns {
        out.push_str(&format!("breakdown {id} at {t}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_directives() {
        let s = parse_scenario("budget A1 40 # rich\nprice R3 J11 5\nbreakdown R1#2 at 3\n").unwrap();
        assert_eq!(s.budgets["A1"], 40);
        assert_eq!(s.prices[&("R3".to_string(), "J11".to_string())], 5);
        assert_eq!(s.breakdowns, vec![(InstanceId::new("R1", 2), 3)]);
        assert_eq!(parse_scenario(&scenario_to_text(&s)).unwrap(), s);
    }

    #[test]
    fn errors_carry_lines() {
        assert_eq!(parse_scenario("\nbudget A1 x\n").unwrap_err().line, 2);
        assert_eq!(parse_scenario("breakdown R1 at 0\n").unwrap_err().line, 1);
        assert!(parse_scenario("price R1 J11 -1\n").is_err());
        assert!(parse_scenario("budget A1 1\nbudget A1 2\n").is_err());
        assert!(parse_scenario("refuel R1\n").is_err());
    }
}
