//! Experiment plumbing behind the `mrfq` command-line tool.

pub mod experiment;
pub mod scaling;

use std::fmt;

/// A model or spec failed its checks; carries one line per problem.
#[derive(Debug)]
pub struct ValidationFailure(pub Vec<String>);

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "validation failed:")?;
        for line in &self.0 {
            write!(f, "\n  {line}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationFailure {}

/// Parses `"2,5"` (1-based) into 0-based indices. Empty input gives an empty list.
pub fn parse_nodes(text: &str, n: usize) -> anyhow::Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let v: usize = part.parse().map_err(|_| anyhow::anyhow!("bad node index {part:?}"))?;
        if v == 0 || v > n {
            anyhow::bail!("node {v} outside 1..={n}");
        }
        out.push(v - 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_lists() {
        assert_eq!(parse_nodes("2, 5", 5).unwrap(), vec![1, 4]);
        assert!(parse_nodes("", 5).unwrap().is_empty());
        assert!(parse_nodes("0", 5).is_err());
        assert!(parse_nodes("6", 5).is_err());
        assert!(parse_nodes("x", 5).is_err());
    }
}
