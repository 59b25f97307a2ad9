use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WordTag {
    Role,
    ActionName,
    Object,
    Other,
}

impl WordTag {
    pub const ALL: [WordTag; 4] = [WordTag::Role, WordTag::ActionName, WordTag::Object, WordTag::Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WordTag::Role => "ROLE",
            WordTag::ActionName => "ACTION_NAME",
            WordTag::Object => "OBJECT",
            WordTag::Other => "OTHER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SentenceType {
    Action,
    Statement,
}

impl SentenceType {
    pub const ALL: [SentenceType; 2] = [SentenceType::Action, SentenceType::Statement];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentenceType::Action => "ACTION",
            SentenceType::Statement => "STATEMENT",
        }
    }
}

/// Control symbol carried by a STATEMENT sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SentenceSemantic {
    BlockBegin,
    BlockEnd,
    Successive,
    Optional,
    Concurrent,
}

impl SentenceSemantic {
    pub const ALL: [SentenceSemantic; 5] = [
        SentenceSemantic::BlockBegin,
        SentenceSemantic::BlockEnd,
        SentenceSemantic::Successive,
        SentenceSemantic::Optional,
        SentenceSemantic::Concurrent,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            SentenceSemantic::BlockBegin => '▷',
            SentenceSemantic::BlockEnd => '◁',
            SentenceSemantic::Successive => '•',
            SentenceSemantic::Optional => '×',
            SentenceSemantic::Concurrent => '+',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.symbol() == c)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentenceSemantic::BlockBegin => "BLOCK_BEGIN",
            SentenceSemantic::BlockEnd => "BLOCK_END",
            SentenceSemantic::Successive => "SUCCESSIVE",
            SentenceSemantic::Optional => "OPTIONAL",
            SentenceSemantic::Concurrent => "CONCURRENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub s_type: SentenceType,
    #[serde(default)]
    pub s_semantic: Option<SentenceSemantic>,
    #[serde(default)]
    pub word_tags: Vec<WordTag>,
}

impl Sentence {
    pub fn action(text: &str, tokens: &[&str], tags: &[WordTag]) -> Self {
        Self {
            text: text.to_string(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            s_type: SentenceType::Action,
            s_semantic: None,
            word_tags: tags.to_vec(),
        }
    }

    pub fn statement(text: &str, tokens: &[&str], semantic: SentenceSemantic) -> Self {
        Self {
            text: text.to_string(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            s_type: SentenceType::Statement,
            s_semantic: Some(semantic),
            word_tags: Vec::new(),
        }
    }

    pub fn is_action(&self) -> bool {
        self.s_type == SentenceType::Action
    }

    /// Checks the label invariants; the message names the offending field.
    pub fn validate(&self) -> Result<(), String> {
        if self.tokens.is_empty() {
            return Err("tokens: sentence has no tokens".into());
        }
        match self.s_type {
            SentenceType::Action => {
                if self.s_semantic.is_some() {
                    return Err("s_semantic: must be empty for an ACTION sentence".into());
                }
                if self.word_tags.len() != self.tokens.len() {
                    return Err(format!(
                        "word_tags: ACTION sentence has {} tags for {} tokens",
                        self.word_tags.len(),
                        self.tokens.len()
                    ));
                }
            }
            SentenceType::Statement => {
                if !self.word_tags.is_empty() {
                    return Err("word_tags: must be empty for a STATEMENT sentence".into());
                }
                if self.s_semantic.is_none() {
                    return Err("s_semantic: missing for a STATEMENT sentence".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Domain {
    Cor,
    Mam,
    Other(String),
}

impl From<String> for Domain {
    fn from(s: String) -> Self {
        match s.as_str() {
            "COR" => Domain::Cor,
            "MAM" => Domain::Mam,
            _ => Domain::Other(s),
        }
    }
}

impl From<Domain> for String {
    fn from(d: Domain) -> Self {
        d.to_string()
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Cor => f.write_str("COR"),
            Domain::Mam => f.write_str("MAM"),
            Domain::Other(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub domain: Domain,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn validate(&self) -> Result<(), String> {
        if self.sentences.is_empty() {
            return Err("sentences: document has no sentences".into());
        }
        for (i, s) in self.sentences.iter().enumerate() {
            s.validate().map_err(|m| format!("sentences[{i}].{m}"))?;
        }
        Ok(())
    }
}
