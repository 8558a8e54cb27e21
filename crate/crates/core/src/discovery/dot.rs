//! DOT-compatible edge lists: `"a" -> "b";` for directed and `"a" -- "b";`
//! for undirected edges. Every node is declared first so isolated nodes and
//! node order survive a round trip.

use std::fmt::Write;

use super::graph::{Cpdag, Dag};
use crate::error::{Error, Result};

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn cpdag_to_dot(g: &Cpdag) -> String {
    let mut s = String::from("digraph cpdag {\n");
    for n in g.nodes() {
        let _ = writeln!(s, "  {};", quote(n));
    }
    for &(a, b) in g.directed() {
        let _ = writeln!(s, "  {} -> {};", quote(&g.nodes()[a]), quote(&g.nodes()[b]));
    }
    for &(a, b) in g.undirected() {
        let _ = writeln!(s, "  {} -- {};", quote(&g.nodes()[a]), quote(&g.nodes()[b]));
    }
    s.push_str("}\n");
    s
}

pub fn dag_to_dot(g: &Dag) -> String {
    let mut s = String::from("digraph dag {\n");
    for n in g.nodes() {
        let _ = writeln!(s, "  {};", quote(n));
    }
    for &(a, b) in g.edges() {
        let _ = writeln!(s, "  {} -> {};", quote(&g.nodes()[a]), quote(&g.nodes()[b]));
    }
    s.push_str("}\n");
    s
}

#[derive(Debug, PartialEq)]
enum Tok {
    Name(String),
    Arrow,
    Line,
}

fn tokenize(stmt: &str, line: usize) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = stmt.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut name = String::new();
            loop {
                match chars.next() {
                    Some('\\') => {
                        if let Some(e) = chars.next() {
                            name.push(e);
                        }
                    }
                    Some('"') => break,
                    Some(ch) => name.push(ch),
                    None => {
                        return Err(Error::Dot {
                            line,
                            message: "unterminated quote".into(),
                        })
                    }
                }
            }
            out.push(Tok::Name(name));
        } else if c == '-' {
            chars.next();
            match chars.next() {
                Some('>') => out.push(Tok::Arrow),
                Some('-') => out.push(Tok::Line),
                _ => {
                    return Err(Error::Dot {
                        line,
                        message: "expected `->` or `--`".into(),
                    })
                }
            }
        } else if c.is_alphanumeric() || c == '_' || c == '.' {
            let mut name = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_alphanumeric() || ch == '_' || ch == '.' {
                    name.push(ch);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Name(name));
        } else {
            return Err(Error::Dot {
                line,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parsed {
    nodes: Vec<String>,
    directed: Vec<(usize, usize)>,
    undirected: Vec<(usize, usize)>,
}

fn parse(text: &str) -> Result<Parsed> {
    let mut p = Parsed {
        nodes: Vec::new(),
        directed: Vec::new(),
        undirected: Vec::new(),
    };
    let index = |nodes: &mut Vec<String>, name: String| -> usize {
        match nodes.iter().position(|n| *n == name) {
            Some(i) => i,
            None => {
                nodes.push(name);
                nodes.len() - 1
            }
        }
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty()
            || trimmed.starts_with("//")
            || trimmed.starts_with('#')
            || trimmed == "}"
            || trimmed.ends_with('{')
        {
            continue;
        }
        for stmt in trimmed.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let toks = tokenize(stmt, line)?;
            match toks.as_slice() {
                [Tok::Name(a)] => {
                    index(&mut p.nodes, a.clone());
                }
                [Tok::Name(a), op, Tok::Name(b)] => {
                    let ia = index(&mut p.nodes, a.clone());
                    let ib = index(&mut p.nodes, b.clone());
                    match op {
                        Tok::Arrow => p.directed.push((ia, ib)),
                        Tok::Line => p.undirected.push((ia, ib)),
                        Tok::Name(_) => unreachable!(),
                    }
                }
                _ => {
                    return Err(Error::Dot {
                        line,
                        message: format!("cannot parse statement `{stmt}`"),
                    })
                }
            }
        }
    }
    Ok(p)
}

pub fn cpdag_from_dot(text: &str) -> Result<Cpdag> {
    let p = parse(text)?;
    Cpdag::new(p.nodes, p.directed, p.undirected)
}

pub fn dag_from_dot(text: &str) -> Result<Dag> {
    let p = parse(text)?;
    if !p.undirected.is_empty() {
        return Err(Error::InvalidGraph(
            "DAG file contains undirected edges".into(),
        ));
    }
    Dag::new(p.nodes, p.directed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cpdag_roundtrip() {
        let names = vec![
            "age".to_string(),
            "sex".into(),
            "marital status".into(),
            "y".into(),
        ];
        let g = Cpdag::new(names, [(0, 3), (1, 3)], [(1, 2)]).unwrap();
        let text = cpdag_to_dot(&g);
        assert!(text.contains("\"age\" -> \"y\";"));
        assert!(text.contains("\"sex\" -- \"marital status\";"));
        assert_eq!(cpdag_from_dot(&text).unwrap(), g);
    }

    #[test]
    fn parses_bare_names() {
        let g = dag_from_dot("digraph g {\n a; b; c;\n a -> b;\n c -> b;\n}\n").unwrap();
        assert_eq!(g.nodes(), &["a", "b", "c"]);
        assert_eq!(g.edges().len(), 2);
        assert!(dag_from_dot("digraph g {\n a -- b;\n}").is_err());
        assert!(matches!(cpdag_from_dot("a => b;"), Err(Error::Dot { .. })));
    }
}
