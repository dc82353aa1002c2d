//! Plain-text columnar dump of a set-cover instance:
//!
//! ```text
//! # comment lines are ignored
//! flights 3
//! columns 2
//! 1.5 0 1
//! 2 1 2
//! ```
//!
//! Each column line is the cost followed by the covered flight ids.

use std::io::{BufRead, Write};

use super::{CoverColumn, LpError, SetCoverInstance};

pub fn write_instance<W: Write>(inst: &SetCoverInstance, mut out: W) -> Result<(), LpError> {
    writeln!(out, "flights {}", inst.num_flights)?;
    writeln!(out, "columns {}", inst.columns.len())?;
    for col in &inst.columns {
        write!(out, "{}", col.cost)?;
        for r in &col.rows {
            write!(out, " {r}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_instance<R: BufRead>(input: R) -> Result<SetCoverInstance, LpError> {
    let mut lines = Vec::new();
    for line in input.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            lines.push(t.to_string());
        }
    }
    let header = |line: Option<&String>, key: &str| -> Result<usize, LpError> {
        let line = line.ok_or_else(|| LpError::Format(format!("missing `{key}` header")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(LpError::Format(format!("expected `{key} <count>`, got `{line}`")));
        }
        parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| LpError::Format(format!("bad count in `{line}`")))
    };
    let num_flights = header(lines.first(), "flights")?;
    let num_columns = header(lines.get(1), "columns")?;
    if lines.len() != num_columns + 2 {
        return Err(LpError::Format(format!(
            "expected {num_columns} column lines, found {}",
            lines.len().saturating_sub(2)
        )));
    }
    let mut columns = Vec::with_capacity(num_columns);
    for line in &lines[2..] {
        let mut parts = line.split_whitespace();
        let cost: f64 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| LpError::Format(format!("bad cost in `{line}`")))?;
        let rows = parts
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| LpError::Format(format!("bad flight id `{v}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        columns.push(CoverColumn::new(rows, cost));
    }
    Ok(SetCoverInstance::new(num_flights, columns))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let inst = SetCoverInstance::new(
            3,
            vec![CoverColumn::new(vec![0, 1], 1.5), CoverColumn::new(vec![2], 0.1 + 0.2)],
        );
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = read_instance(&buf[..]).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_truncated_input() {
        assert!(read_instance("flights 2\ncolumns 2\n1 0\n".as_bytes()).is_err());
        assert!(read_instance("columns 2\n".as_bytes()).is_err());
    }
}
