//! Plain-text instance fixtures.
//!
//! ```text
//! N K C T family
//! mu_11 mu_12 ... mu_1K
//! ...
//! mu_N1 ... mu_NK
//! ```
//!
//! Means are written with the shortest representation that parses back to
//! the identical `f64`.

use super::{EnvError, Instance, RewardFamily};
use std::fmt::Write;

pub(super) fn write(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        instance.n_users,
        instance.n_arms,
        instance.anonymity,
        instance.horizon,
        instance.family.name()
    );
    for i in 0..instance.n_users {
        let row: Vec<String> = instance.row(i).iter().map(|m| format!("{m}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub(super) fn read(text: &str) -> Result<Instance, EnvError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| EnvError::Fixture("missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(EnvError::Fixture(format!(
            "header needs `N K C T family`, got `{header}`"
        )));
    }
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| EnvError::Fixture(format!("not a count: `{s}`")))
    };
    let (n, k, c, t) = (
        int(fields[0])?,
        int(fields[1])?,
        int(fields[2])?,
        int(fields[3])?,
    );
    let family = RewardFamily::from_name(fields[4])
        .ok_or_else(|| EnvError::Fixture(format!("unknown reward family `{}`", fields[4])))?;

    let mut means = Vec::with_capacity(n * k);
    for row in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| EnvError::Fixture(format!("missing row {}", row + 1)))?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| EnvError::Fixture(format!("not a number: `{v}`")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != k {
            return Err(EnvError::Fixture(format!(
                "row {} has {} entries, expected {k}",
                row + 1,
                values.len()
            )));
        }
        means.extend(values);
    }
    if lines.next().is_some() {
        return Err(EnvError::Fixture("trailing rows after N means rows".into()));
    }
    Instance::new(n, k, c, t, means, family)
}
