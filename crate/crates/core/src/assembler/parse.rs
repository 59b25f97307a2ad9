//! Label stream → process structure tree.
//!
//! ```text
//! Process := Elem*
//! Elem    := Action | Gateway | •
//! Gateway := (× | +) Branch+
//! Branch  := ▷ Elem* ◁
//!          | Action            (only when no ▷ follows the gateway: each action
//!                               of the following maximal action run is a branch)
//! ```

use super::args::extract_args;
use super::diag::{Diagnostic, Severity};
use super::pst::{branch, push_flat, Pst};
use crate::corpus::{Sentence, SentenceSemantic, SentenceType};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Abort on the first ERROR diagnostic.
    Strict,
    /// Recover from every problem and report it.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Action,
    Xor,
    And,
    Open,
    Close,
    Noop,
}

fn classify(s: &Sentence) -> Tok {
    match (s.s_type, s.s_semantic) {
        (SentenceType::Action, _) => Tok::Action,
        (_, Some(SentenceSemantic::Optional)) => Tok::Xor,
        (_, Some(SentenceSemantic::Concurrent)) => Tok::And,
        (_, Some(SentenceSemantic::BlockBegin)) => Tok::Open,
        (_, Some(SentenceSemantic::BlockEnd)) => Tok::Close,
        (_, Some(SentenceSemantic::Successive)) | (_, None) => Tok::Noop,
    }
}

struct Parser<'a> {
    sentences: &'a [Sentence],
    toks: Vec<Tok>,
    pos: usize,
    mode: ParseMode,
    next_id: usize,
    diags: Vec<Diagnostic>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn report(&mut self, sentence: Option<usize>, severity: Severity, msg: impl Into<String>) -> Result<()> {
        let d = Diagnostic::new(sentence, severity, msg);
        if severity == Severity::Error && self.mode == ParseMode::Strict {
            return Err(Error::Parse(d.to_string()));
        }
        self.diags.push(d);
        Ok(())
    }

    fn leaf(&mut self) -> Pst {
        let i = self.pos;
        self.pos += 1;
        let (node, diags) = extract_args(&self.sentences[i], i, self.next_id);
        self.next_id += 1;
        self.diags.extend(diags);
        Pst::Leaf(node)
    }

    /// Elements up to (not including) a closing ◁ when `in_block`, else to the end.
    fn elems(&mut self, in_block: bool) -> Result<Vec<Pst>> {
        let mut seq = Vec::new();
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Action => {
                    let l = self.leaf();
                    seq.push(l);
                }
                Tok::Noop => self.pos += 1,
                Tok::Xor | Tok::And => {
                    if let Some(p) = self.gateway()? {
                        push_flat(&mut seq, p);
                    }
                }
                Tok::Open => {
                    let at = self.pos;
                    self.report(Some(at), Severity::Warning, "▷ without a preceding gateway; read as a sequential block")?;
                    let body = self.block()?;
                    push_flat(&mut seq, Pst::Seq(body));
                }
                Tok::Close if in_block => break,
                Tok::Close => {
                    let at = self.pos;
                    self.report(Some(at), Severity::Error, "unmatched ◁")?;
                    self.pos += 1;
                }
            }
        }
        Ok(seq)
    }

    /// Consumes `▷ Elem* ◁`; a missing ◁ at the end of the document is implied.
    fn block(&mut self) -> Result<Vec<Pst>> {
        let open = self.pos;
        self.pos += 1;
        let body = self.elems(true)?;
        match self.peek() {
            Some(Tok::Close) => self.pos += 1,
            _ => self.report(Some(open), Severity::Warning, "▷ never closed; closed at end of document")?,
        }
        Ok(body)
    }

    fn gateway(&mut self) -> Result<Option<Pst>> {
        let at = self.pos;
        let kind = self.toks[at];
        self.pos += 1;
        while self.peek() == Some(Tok::Noop) {
            self.pos += 1;
        }
        let mut branches = Vec::new();
        match self.peek() {
            Some(Tok::Open) => {
                while self.peek() == Some(Tok::Open) {
                    let body = self.block()?;
                    branches.push(branch(body));
                }
            }
            _ => {
                while self.peek() == Some(Tok::Action) {
                    let l = self.leaf();
                    branches.push(l);
                }
            }
        }
        let symbol = if kind == Tok::Xor { '×' } else { '+' };
        match branches.len() {
            0 => {
                self.report(Some(at), Severity::Error, format!("{symbol} gateway without branches"))?;
                Ok(None)
            }
            1 => {
                self.report(
                    Some(at),
                    Severity::Warning,
                    format!("{symbol} gateway with a single branch; read as a sequence"),
                )?;
                Ok(Some(Pst::Seq(branches)))
            }
            _ => Ok(Some(if kind == Tok::Xor {
                Pst::Xor(branches)
            } else {
                Pst::And(branches)
            })),
        }
    }
}

/// Builds the tree for one document. The root is always a sequence.
pub fn parse_labels(sentences: &[Sentence], mode: ParseMode) -> Result<(Pst, Vec<Diagnostic>)> {
    let mut p = Parser {
        sentences,
        toks: sentences.iter().map(classify).collect(),
        pos: 0,
        mode,
        next_id: 0,
        diags: Vec::new(),
    };
    let body = p.elems(false)?;
    Ok((Pst::Seq(body), p.diags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::{recipe_document, repair_document};
    use crate::corpus::WordTag;

    fn act(name: &str) -> Sentence {
        Sentence::action(name, &[name], &[WordTag::ActionName])
    }

    fn st(sem: SentenceSemantic) -> Sentence {
        Sentence::statement("s", &["s"], sem)
    }

    use SentenceSemantic::*;

    #[test]
    fn recipe_parses_to_and_of_two_actions() {
        let (pst, diags) = parse_labels(&recipe_document().sentences, ParseMode::Strict).unwrap();
        assert_eq!(pst.outline(), "Seq[And[chill, bake]]");
        assert!(diags.is_empty());
        let leaves = pst.leaves();
        assert_eq!((leaves[0].role.as_str(), leaves[0].object.as_str()), ("", "mixture"));
    }

    #[test]
    fn explicit_branches_and_blocks() {
        let s = [st(Optional), st(BlockBegin), act("a1"), st(BlockEnd), st(BlockBegin), act("a2"), act("a3"), st(BlockEnd)];
        let (pst, diags) = parse_labels(&s, ParseMode::Strict).unwrap();
        assert_eq!(pst.outline(), "Seq[Xor[a1, Seq[a2, a3]]]");
        assert!(diags.is_empty());
        let (pst, _) = parse_labels(&repair_document().sentences, ParseMode::Strict).unwrap();
        assert_eq!(pst.outline(), "Seq[opens, Xor[replace, clean]]");
    }

    #[test]
    fn empty_document() {
        let (pst, diags) = parse_labels(&[], ParseMode::Strict).unwrap();
        assert_eq!(pst, Pst::Seq(vec![]));
        assert!(diags.is_empty());
    }

    #[test]
    fn implicit_run_stops_at_statement() {
        let s = [act("a"), st(Concurrent), act("b"), act("c"), st(Successive), act("d")];
        let (pst, _) = parse_labels(&s, ParseMode::Strict).unwrap();
        assert_eq!(pst.outline(), "Seq[a, And[b, c], d]");
    }

    #[test]
    fn error_and_warning_recovery() {
        let s = [act("a"), st(BlockEnd), act("b")];
        assert!(matches!(parse_labels(&s, ParseMode::Strict), Err(Error::Parse(m)) if m.contains("sentence 1")));
        let (pst, diags) = parse_labels(&s, ParseMode::Lenient).unwrap();
        assert_eq!(pst.outline(), "Seq[a, b]");
        assert_eq!(diags[0].severity, Severity::Error);

        let s = [st(Optional), st(Successive)];
        assert!(parse_labels(&s, ParseMode::Strict).is_err());
        assert_eq!(parse_labels(&s, ParseMode::Lenient).unwrap().0, Pst::Seq(vec![]));

        let s = [st(BlockBegin), act("a"), act("b"), st(BlockEnd)];
        let (pst, diags) = parse_labels(&s, ParseMode::Strict).unwrap();
        assert_eq!(pst.outline(), "Seq[a, b]");
        assert_eq!(diags[0].severity, Severity::Warning);

        let s = [st(Concurrent), act("a"), st(Successive)];
        let (pst, diags) = parse_labels(&s, ParseMode::Strict).unwrap();
        assert_eq!(pst.outline(), "Seq[a]");
        assert!(diags[0].message.contains("single branch"));

        let s = [st(Optional), st(BlockBegin), act("a"), st(BlockEnd), st(BlockBegin), act("b")];
        let (pst, diags) = parse_labels(&s, ParseMode::Strict).unwrap();
        assert_eq!(pst.outline(), "Seq[Xor[a, b]]");
        assert!(diags[0].message.contains("never closed"));
    }
}
