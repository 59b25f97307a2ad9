//! Small hand-labelled corpus covering every sentence and word class.

use super::tokenize::tokenize;
use super::types::{Document, Domain, Sentence, SentenceSemantic, SentenceType, WordTag};

/// `tags` holds one letter per token: R(ole), N(ame), O(bject), `.` other.
fn action(text: &str, tags: &str) -> Sentence {
    let tokens = tokenize(text);
    let word_tags: Vec<WordTag> = tags
        .chars()
        .map(|c| match c {
            'R' => WordTag::Role,
            'N' => WordTag::ActionName,
            'O' => WordTag::Object,
            _ => WordTag::Other,
        })
        .collect();
    assert_eq!(tokens.len(), word_tags.len(), "tag string for `{text}`");
    Sentence {
        text: text.to_string(),
        tokens,
        s_type: SentenceType::Action,
        s_semantic: None,
        word_tags,
    }
}

fn statement(text: &str, sem: SentenceSemantic) -> Sentence {
    Sentence {
        text: text.to_string(),
        tokens: tokenize(text),
        s_type: SentenceType::Statement,
        s_semantic: Some(sem),
        word_tags: Vec::new(),
    }
}

/// The recipe fragment with the "two steps" concurrency statement.
pub fn recipe_document() -> Document {
    use SentenceSemantic::*;
    Document {
        id: "recipe".into(),
        domain: Domain::Cor,
        sentences: vec![
            statement("you are required to finish two steps", Concurrent),
            action("chill the mixture for about 20 minutes until it thickens", "N.O......."),
            action("bake the crust until golden", "N.O.."),
        ],
    }
}

pub fn repair_document() -> Document {
    use SentenceSemantic::*;
    Document {
        id: "repair".into(),
        domain: Domain::Mam,
        sentences: vec![
            action("the technician opens the panel", ".RN.O"),
            statement("choose one of the following fixes", Optional),
            statement("the first fix begins here", BlockBegin),
            action("replace the battery", "N.O"),
            statement("the first fix ends here", BlockEnd),
            statement("the second fix begins here", BlockBegin),
            action("clean the contacts", "N.O"),
            statement("the second fix ends here", BlockEnd),
            statement("then continue with the next step", Successive),
        ],
    }
}

/// Twelve sentences over two documents.
pub fn toy_corpus() -> Vec<Document> {
    vec![recipe_document(), repair_document()]
}
