//! Parsers for the plain-text input formats: subgroup files (one
//! generator word per line), presentation files (`[generators]` /
//! `[relator]` sections), and tree-path files for `stabilizer`.

use std::fmt;

use cgt_core::bassserre::{GraphOfFreeGroups, PathStep, TreePath};
use cgt_core::{Alphabet, Word, WordError};

#[derive(Debug)]
pub enum FileError {
    Syntax { line: usize, msg: String },
    Word(WordError),
    Empty(&'static str),
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FileError::Syntax { line, msg } => write!(f, "line {line}: {msg}"),
            FileError::Word(e) => write!(f, "{e}"),
            FileError::Empty(what) => write!(f, "no {what} found in file"),
        }
    }
}

impl std::error::Error for FileError {}

impl From<WordError> for FileError {
    fn from(e: WordError) -> FileError {
        FileError::Word(e)
    }
}

/// Generator names appearing in a chunk of words-syntax text, in first
/// appearance order (used when no explicit alphabet is given).
fn collect_names(texts: &[&str]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for text in texts {
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let name = tok.split_once('^').map_or(tok, |(n, _)| n);
            if !names.iter().any(|n| n == name) {
                names.push(name.to_owned());
            }
        }
    }
    names
}

/// Subgroup file: one generator word per line, `#` comments. The
/// ambient alphabet is `explicit` if given, otherwise inferred from the
/// generator names that occur.
pub fn parse_subgroup_file(
    text: &str,
    explicit: Option<&str>,
) -> Result<(Alphabet, Vec<Word>), FileError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let alphabet = match explicit {
        Some(names) => Alphabet::new(names.split_whitespace())?,
        None => {
            let names = collect_names(&lines);
            if names.is_empty() {
                return Err(FileError::Empty("generator words"));
            }
            Alphabet::new(names)?
        }
    };
    let words = lines
        .iter()
        .map(|l| Word::parse(&alphabet, l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((alphabet, words))
}

/// Presentation file: a `[generators]` line followed by one `[relator]`
/// line per relator, all in words syntax.
pub fn parse_presentation_file(text: &str) -> Result<(Alphabet, Vec<Word>), FileError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut relator_texts: Vec<(usize, String)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("[generators]") {
            if alphabet.is_some() {
                return Err(FileError::Syntax {
                    line: ln + 1,
                    msg: "duplicate [generators] section".to_owned(),
                });
            }
            alphabet = Some(Alphabet::new(rest.split_whitespace())?);
        } else if let Some(rest) = line.strip_prefix("[relator]") {
            relator_texts.push((ln + 1, rest.to_owned()));
        } else {
            return Err(FileError::Syntax {
                line: ln + 1,
                msg: "expected `[generators] ...` or `[relator] ...`".to_owned(),
            });
        }
    }
    let alphabet = alphabet.ok_or(FileError::Empty("[generators] section"))?;
    if relator_texts.is_empty() {
        return Err(FileError::Empty("[relator] lines"));
    }
    let relators = relator_texts
        .iter()
        .map(|(_, t)| Word::parse(&alphabet, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((alphabet, relators))
}

/// Canonical form of a presentation file.
pub fn serialize_presentation(alphabet: &Alphabet, relators: &[Word]) -> String {
    let mut out = format!("[generators] {}\n", alphabet.names().join(" "));
    for r in relators {
        out.push_str(&format!("[relator] {r}\n"));
    }
    out
}

/// Path file: `base: VERTEX`, then one `step: EDGE fwd|back [word...]`
/// line per step; the word is the connecting element at the step's
/// source vertex (omitted = identity).
pub fn parse_path_file(text: &str, gog: &GraphOfFreeGroups) -> Result<TreePath, FileError> {
    let mut base: Option<usize> = None;
    let mut steps: Vec<PathStep> = Vec::new();
    let mut at: Option<usize> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let fail = |msg: String| FileError::Syntax { line: ln + 1, msg };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("base:") {
            let v = gog
                .vertex_index(rest.trim())
                .map_err(|e| fail(e.to_string()))?;
            base = Some(v);
            at = Some(v);
        } else if let Some(rest) = line.strip_prefix("step:") {
            let cur = at.ok_or_else(|| fail("`step:` before `base:`".to_owned()))?;
            let mut toks = rest.split_whitespace();
            let edge_name = toks.next().ok_or_else(|| fail("missing edge name".to_owned()))?;
            let edge = gog
                .edge_index(edge_name)
                .map_err(|e| fail(e.to_string()))?;
            let forward = match toks.next() {
                Some("fwd") => true,
                Some("back") => false,
                other => {
                    return Err(fail(format!(
                        "expected `fwd` or `back`, got {other:?}"
                    )))
                }
            };
            let word_text = toks.collect::<Vec<_>>().join(" ");
            let element = Word::parse(&gog.vertices[cur].alphabet, &word_text)?;
            at = Some(if forward {
                gog.edges[edge].to
            } else {
                gog.edges[edge].from
            });
            steps.push(PathStep {
                element,
                edge,
                forward,
            });
        } else {
            return Err(fail("expected `base:` or `step:`".to_owned()));
        }
    }
    Ok(TreePath {
        base: base.ok_or(FileError::Empty("`base:` line"))?,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgroup_file_inferred_alphabet() {
        let (alpha, words) = parse_subgroup_file("# H\na^2\nb a b^-1\n", None).unwrap();
        assert_eq!(alpha.names(), ["a", "b"]);
        assert_eq!(words.len(), 2);
        assert_eq!(words[0].to_string(), "a^2");
    }

    #[test]
    fn subgroup_file_explicit_alphabet() {
        let (alpha, _) = parse_subgroup_file("a^2\n", Some("a b")).unwrap();
        assert_eq!(alpha.names(), ["a", "b"]);
    }

    #[test]
    fn presentation_round_trip() {
        let text = "[generators] a b\n[relator] a b a^-1 b^-2\n";
        let (alpha, rels) = parse_presentation_file(text).unwrap();
        assert_eq!(serialize_presentation(&alpha, &rels), text);
        let again = parse_presentation_file(&serialize_presentation(&alpha, &rels)).unwrap();
        assert_eq!(again.1, rels);
    }

    #[test]
    fn presentation_rejects_noise() {
        assert!(parse_presentation_file("[generators] a\njunk\n").is_err());
        assert!(parse_presentation_file("[relator] a\n").is_err());
    }

    #[test]
    fn path_file_parses() {
        let gog = cgt_core::bassserre::parse_gog(
            "[vertex A] gens: a\n[vertex B] gens: b\n[edge e] from: A to: B / d0: a^2 / d1: b^2\n",
        )
        .unwrap();
        let path = parse_path_file("base: B\nstep: e back\nstep: e fwd a\n", &gog).unwrap();
        assert_eq!(path.base, 1);
        assert_eq!(path.steps.len(), 2);
        assert!(!path.steps[0].forward);
        assert_eq!(path.steps[1].element.to_string(), "a");
    }
}
