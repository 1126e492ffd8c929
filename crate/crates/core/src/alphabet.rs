//! Generator alphabets and words.
//!
//! An alphabet is an ordered list of distinct generator labels, each with a
//! positive integer degree. Words are stored as interned generator indices
//! together with their cached total degree, so that term maps sorted on
//! `Word` iterate in (degree, lexicographic) order — the canonical order used
//! everywhere for deterministic serialization.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorAlphabet {
    labels: Vec<String>,
    degrees: Vec<u32>,
    index: HashMap<String, u16>,
}

impl GeneratorAlphabet {
    pub fn new(generators: &[(&str, u32)]) -> Result<Arc<Self>> {
        let mut labels = Vec::with_capacity(generators.len());
        let mut degrees = Vec::with_capacity(generators.len());
        let mut index = HashMap::new();
        for (i, (label, degree)) in generators.iter().enumerate() {
            if *degree == 0 {
                return Err(Error::domain(format!("generator `{label}` has degree 0")));
            }
            if index.insert(label.to_string(), i as u16).is_some() {
                return Err(Error::domain(format!("duplicate generator `{label}`")));
            }
            labels.push(label.to_string());
            degrees.push(*degree);
        }
        Ok(Arc::new(GeneratorAlphabet {
            labels,
            degrees,
            index,
        }))
    }

    /// All generators of degree 1.
    pub fn unit_degrees(labels: &[&str]) -> Result<Arc<Self>> {
        let gens: Vec<(&str, u32)> = labels.iter().map(|l| (*l, 1)).collect();
        Self::new(&gens)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: u16) -> &str {
        &self.labels[i as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn degree_of(&self, i: u16) -> u32 {
        self.degrees[i as usize]
    }

    pub fn lookup(&self, label: &str) -> Result<u16> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::parse(format!("unknown generator `{label}`")))
    }

    pub fn word_degree(&self, letters: &[u16]) -> u32 {
        letters.iter().map(|&l| self.degree_of(l)).sum()
    }

    pub fn word(&self, letters: Vec<u16>) -> Word {
        let degree = self.word_degree(&letters);
        Word { degree, letters }
    }

    pub fn word_from_labels(&self, labels: &[&str]) -> Result<Word> {
        let letters = labels
            .iter()
            .map(|l| self.lookup(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.word(letters))
    }

    pub fn empty_word(&self) -> Word {
        Word {
            degree: 0,
            letters: Vec::new(),
        }
    }
}

/// A word over some alphabet, ordered by (total degree, lexicographic).
///
/// The degree is cached at construction; words only make sense relative to
/// the alphabet that produced them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    degree: u32,
    letters: Vec<u16>,
}

impl Word {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn letters(&self) -> &[u16] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation (degrees add).
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word {
            degree: self.degree + other.degree,
            letters,
        }
    }

    pub fn render(&self, alphabet: &GeneratorAlphabet) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        self.letters
            .iter()
            .map(|&l| alphabet.label(l))
            .collect::<Vec<_>>()
            .join(".")
    }
}
