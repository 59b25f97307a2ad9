use super::diag::{Diagnostic, Severity};
use super::pst::ActionNode;
use crate::corpus::{Sentence, WordTag};

/// First contiguous run of `tag`, words joined by single spaces, and the number of runs.
fn first_run(tokens: &[String], tags: &[WordTag], tag: WordTag) -> (String, usize) {
    let mut runs = 0;
    let mut first: Vec<&str> = Vec::new();
    let mut prev = false;
    for (tok, &t) in tokens.iter().zip(tags) {
        let hit = t == tag;
        if hit && !prev {
            runs += 1;
        }
        if hit && runs == 1 {
            first.push(tok);
        }
        prev = hit;
    }
    (first.join(" "), runs)
}

/// Reads role, name and object from an action sentence's word tags.
/// Missing tags count as OTHER.
pub fn extract_args(s: &Sentence, sentence: usize, id: usize) -> (ActionNode, Vec<Diagnostic>) {
    let mut tags = s.word_tags.clone();
    tags.resize(s.tokens.len(), WordTag::Other);
    let mut diags = Vec::new();
    let mut field = |tag: WordTag, what: &str| {
        let (text, runs) = first_run(&s.tokens, &tags, tag);
        if runs > 1 {
            diags.push(Diagnostic::new(
                Some(sentence),
                Severity::Warning,
                format!("{runs} separate {what} runs; the first is used"),
            ));
        }
        text
    };
    let role = field(WordTag::Role, "role");
    let name = field(WordTag::ActionName, "action-name");
    let object = field(WordTag::Object, "object");
    if name.is_empty() {
        diags.push(Diagnostic::new(Some(sentence), Severity::Warning, "action without name"));
    }
    (
        ActionNode {
            id,
            role,
            name,
            object,
            sentence,
        },
        diags,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::recipe_document;

    #[test]
    fn example_sentence_arguments() {
        let doc = recipe_document();
        let (a, d) = extract_args(&doc.sentences[1], 1, 0);
        assert_eq!((a.role.as_str(), a.name.as_str(), a.object.as_str()), ("", "chill", "mixture"));
        assert!(d.is_empty());
    }

    #[test]
    fn all_other_and_split_runs() {
        use WordTag::*;
        let s = Sentence::action("x y", &["x", "y"], &[Other, Other]);
        let (a, d) = extract_args(&s, 4, 0);
        assert!(a.name.is_empty());
        assert_eq!(d[0].message, "action without name");
        assert_eq!(d[0].sentence, Some(4));

        let s = Sentence::action(
            "wash pots and lids now",
            &["wash", "pots", "and", "lids", "now"],
            &[ActionName, Object, Other, Object, Other],
        );
        let (a, d) = extract_args(&s, 0, 0);
        assert_eq!(a.object, "pots");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);

        let s = Sentence::action("turn off it", &["turn", "off", "it"], &[ActionName, ActionName, Object]);
        assert_eq!(extract_args(&s, 0, 0).0.name, "turn off");
    }
}
