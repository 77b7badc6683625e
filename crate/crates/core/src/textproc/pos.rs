//! Rule-and-lexicon part-of-speech tagger over a compact 22-tag set.
//!
//! Closed-class words come from a fixed lexicon; open-class words use a
//! small lexicon plus suffix, shape and context rules. Context never
//! crosses a sentence boundary.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::lexicon::CoarsePos;
use super::tokenize::{TokenKind, TokenizedText};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    Nn,
    Nns,
    Nnp,
    Vb,
    Vbd,
    Vbg,
    Vbz,
    Md,
    Jj,
    Jjr,
    Jjs,
    Rb,
    Dt,
    Prp,
    PrpS,
    Wh,
    In,
    Cc,
    To,
    Cd,
    Uh,
    Ex,
}

/// Every tag, in registry order.
pub const TAGSET: [PosTag; 22] = [
    PosTag::Nn,
    PosTag::Nns,
    PosTag::Nnp,
    PosTag::Vb,
    PosTag::Vbd,
    PosTag::Vbg,
    PosTag::Vbz,
    PosTag::Md,
    PosTag::Jj,
    PosTag::Jjr,
    PosTag::Jjs,
    PosTag::Rb,
    PosTag::Dt,
    PosTag::Prp,
    PosTag::PrpS,
    PosTag::Wh,
    PosTag::In,
    PosTag::Cc,
    PosTag::To,
    PosTag::Cd,
    PosTag::Uh,
    PosTag::Ex,
];

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Nn => "NN",
            PosTag::Nns => "NNS",
            PosTag::Nnp => "NNP",
            PosTag::Vb => "VB",
            PosTag::Vbd => "VBD",
            PosTag::Vbg => "VBG",
            PosTag::Vbz => "VBZ",
            PosTag::Md => "MD",
            PosTag::Jj => "JJ",
            PosTag::Jjr => "JJR",
            PosTag::Jjs => "JJS",
            PosTag::Rb => "RB",
            PosTag::Dt => "DT",
            PosTag::Prp => "PRP",
            PosTag::PrpS => "PRP$",
            PosTag::Wh => "WH",
            PosTag::In => "IN",
            PosTag::Cc => "CC",
            PosTag::To => "TO",
            PosTag::Cd => "CD",
            PosTag::Uh => "UH",
            PosTag::Ex => "EX",
        }
    }

    pub fn index(self) -> usize {
        TAGSET
            .iter()
            .position(|&t| t == self)
            .expect("tag in tagset")
    }

    /// Open-class coarse category; `None` for function tags and proper nouns.
    pub fn coarse(self) -> Option<CoarsePos> {
        match self {
            PosTag::Nn | PosTag::Nns => Some(CoarsePos::Noun),
            PosTag::Vb | PosTag::Vbd | PosTag::Vbg | PosTag::Vbz => Some(CoarsePos::Verb),
            PosTag::Jj | PosTag::Jjr | PosTag::Jjs => Some(CoarsePos::Adj),
            PosTag::Rb => Some(CoarsePos::Adv),
            _ => None,
        }
    }

    fn is_determiner_like(self) -> bool {
        matches!(
            self,
            PosTag::Dt | PosTag::PrpS | PosTag::Jj | PosTag::Jjr | PosTag::Jjs | PosTag::Cd
        )
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TAGSET
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::data(format!("unknown POS tag '{s}'")))
    }
}

/// One tag per word token, in token order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosTagging {
    pub tags: Vec<PosTag>,
}

const CLOSED: &[(PosTag, &str)] = &[
    (PosTag::Dt, "the a an this that these those each every some any no all both either neither another such"),
    (PosTag::Prp, "i me you he him she her it we us they them myself yourself himself herself itself ourselves themselves yourselves someone somebody something anyone anybody anything everyone everybody everything nobody nothing i'm i've i'll i'd you're you've you'll you'd he's he'd she's she'd it's we're we've we'll we'd they're they've they'll they'd that's there's let's"),
    (PosTag::PrpS, "my your his its our their mine yours ours theirs hers"),
    (PosTag::Wh, "who whom whose which what when where why how whoever whatever whenever wherever what's"),
    (PosTag::In, "of in on at by for with about against between into through during before after above below from off over under again than as like near since until upon within without among across along around behind beyond despite toward towards via per because although though while if unless whether onto throughout"),
    (PosTag::Cc, "and or but nor yet"),
    (PosTag::To, "to"),
    (PosTag::Md, "can could will would shall should may might must ought can't couldn't won't wouldn't shouldn't cannot"),
    (PosTag::Ex, "there"),
    (PosTag::Uh, "oh wow yeah hey ok okay hmm yes ah ugh lol please"),
    (PosTag::Cd, "one two three four five six seven eight nine ten eleven twelve twenty thirty forty fifty hundred thousand million billion dozen"),
    (PosTag::Rb, "not very really just also too so quite rather almost always never often sometimes usually still already even ever only here now then soon perhaps maybe once twice today yesterday tomorrow however moreover therefore furthermore indeed instead otherwise meanwhile nevertheless thus hence actually certainly probably definitely simply else away back ago well anyway besides basically honestly apparently frankly finally clearly obviously much more most less least enough up down out far later early together alone"),
    (PosTag::Vbz, "is has does isn't hasn't doesn't"),
    (PosTag::Vbd, "was were had did been done wasn't weren't hadn't didn't said went got made came took saw knew thought found gave told felt left kept began ran sat stood wrote brought bought built meant met paid sent spent lost held heard led became grew drew threw fell forgot understood taught caught sold won"),
    (PosTag::Vbg, "being having doing"),
    (PosTag::Vb, "be am are have do aren't haven't don't get go make say know think take see come want look use find give tell work seem feel try leave call keep let begin help talk turn start show hear play run move like live believe hold bring happen write sit stand lose pay meet include continue set learn change lead understand watch follow stop create speak read spend grow open walk win offer remember love consider appear buy wait serve die send expect build stay fall cut reach kill remain suggest raise pass sell require report decide pull need mean ask put become hope discover apply enjoy guess wonder suppose agree explain prefer admit argue travel"),
    (PosTag::Jj, "good new old great little own other right big high different small large next young important few public bad same able sure happy sad whole free real true full hard easy strong clear simple short long late early recent certain special open human local social national political major possible common poor natural significant similar hot cold dark nice fine wrong main entire particular obvious minimal daunting sleepy original last first second third final busy quiet tired ready"),
    (PosTag::Jjr, "better worse bigger smaller larger faster slower older younger easier harder higher lower greater longer shorter stronger newer fewer"),
    (PosTag::Jjs, "best worst biggest smallest largest fastest oldest youngest easiest hardest highest lowest greatest longest shortest strongest newest"),
    (PosTag::Nn, "time year way day man thing woman life child world school state family group country problem hand part place case week company system program question work government number night point home water room mother area money story fact month lot study book eye job word business issue side kind head house service friend father power hour game line end member law car city community name president team minute idea kid body information back parent face level office door health person art war history party result morning reason research girl guy moment air teacher force education street professor visitor bear scent doll interest layout section profile publication store homework reading load print coffee weekend blog post music movie food dinner lunch breakfast weather rain summer winter garden dog cat phone computer email class exam paper project trip travel train bus road town market shop price library librarian student campus news"),
    (PosTag::Nns, "people children men women years days times things students books friends parents kids hours weeks months minutes stores"),
];

fn lexicon() -> &'static HashMap<&'static str, PosTag> {
    static LEXICON: OnceLock<HashMap<&'static str, PosTag>> = OnceLock::new();
    LEXICON.get_or_init(|| {
        let mut map = HashMap::new();
        for &(tag, words) in CLOSED {
            for word in words.split_whitespace() {
                map.entry(word).or_insert(tag);
            }
        }
        map
    })
}

/// Words in the lexicon whose base form is also a common noun.
const NOUN_VERB: &str = "work study look use help talk turn start show play run walk love need change call report wait stay fall cut pass sell watch reach offer hope read guess travel";

fn noun_verb(word: &str) -> bool {
    NOUN_VERB.split_whitespace().any(|w| w == word)
}

fn is_subject_pronoun(word: &str) -> bool {
    matches!(word, "i" | "you" | "we" | "they")
}

/// Do-support and negation: the next unknown word is a bare verb.
fn takes_bare_verb(word: &str) -> bool {
    matches!(
        word,
        "do" | "does" | "did" | "don't" | "doesn't" | "didn't" | "not" | "never"
    )
}

fn suffix_tag(word: &str) -> Option<PosTag> {
    let len = word.chars().count();
    let ends = |s: &str| {
        let stem_min = if s.len() <= 2 { 3 } else { 2 };
        word.ends_with(s) && len >= s.len() + stem_min
    };
    if ends("ing") {
        return Some(PosTag::Vbg);
    }
    if ends("ed") {
        return Some(PosTag::Vbd);
    }
    if ends("ly") {
        return Some(PosTag::Rb);
    }
    const NOUN: &[&str] = &[
        "tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship", "ism", "ist", "er", "or",
        "ure", "age", "hood", "dom",
    ];
    const ADJ: &[&str] = &[
        "ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish", "ary", "ian", "est", "y",
    ];
    const VERB: &[&str] = &["ize", "ise", "ify"];
    if NOUN.iter().any(|s| ends(s)) {
        return Some(PosTag::Nn);
    }
    if ADJ.iter().any(|s| ends(s)) {
        return Some(PosTag::Jj);
    }
    if VERB.iter().any(|s| ends(s)) {
        return Some(PosTag::Vb);
    }
    None
}

fn plural_shape(word: &str) -> bool {
    word.len() > 3
        && word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
        && !word.contains('\'')
}

fn tag_word(surface: &str, sentence_initial: bool, prev: Option<(PosTag, &str)>) -> PosTag {
    let lower = surface.to_lowercase().replace('\u{2019}', "'");
    let prev_tag = prev.map(|(t, _)| t);
    if let Some(&tag) = lexicon().get(lower.as_str()) {
        return disambiguate(&lower, tag, prev);
    }
    let capitalized = surface.chars().next().is_some_and(char::is_uppercase);
    if capitalized && !sentence_initial {
        return PosTag::Nnp;
    }
    if lower.contains('-') || lower.contains('_') {
        return if capitalized { PosTag::Nnp } else { PosTag::Jj };
    }
    if plural_shape(&lower) {
        let base = &lower[..lower.len() - 1];
        let verb_base = lexicon().get(base) == Some(&PosTag::Vb);
        let after_subject =
            prev_tag.is_some_and(|t| matches!(t, PosTag::Nn | PosTag::Nnp | PosTag::Prp));
        if after_subject && (verb_base || !prev_tag.is_some_and(PosTag::is_determiner_like)) {
            return PosTag::Vbz;
        }
        if capitalized && sentence_initial && suffix_tag(base).is_none() && !verb_base {
            return PosTag::Nnp;
        }
        return PosTag::Nns;
    }
    if let Some(tag) = suffix_tag(&lower) {
        return tag;
    }
    if capitalized && sentence_initial {
        return PosTag::Nnp;
    }
    match prev {
        Some((PosTag::To | PosTag::Md, _)) => PosTag::Vb,
        Some((PosTag::Prp, w)) if is_subject_pronoun(w) => PosTag::Vb,
        Some((_, w)) if takes_bare_verb(w) => PosTag::Vb,
        _ => PosTag::Nn,
    }
}

/// Left-context corrections for lexicon hits.
fn disambiguate(word: &str, tag: PosTag, prev: Option<(PosTag, &str)>) -> PosTag {
    let prev_tag = prev.map(|(t, _)| t);
    match tag {
        PosTag::Vb if noun_verb(word) => {
            if prev_tag.is_some_and(|t| t.is_determiner_like() || t == PosTag::In) {
                PosTag::Nn
            } else {
                PosTag::Vb
            }
        }
        PosTag::Dt if word == "that" => {
            if prev_tag.is_some_and(|t| {
                matches!(
                    t,
                    PosTag::Vb | PosTag::Vbd | PosTag::Vbz | PosTag::Nn | PosTag::Nns
                )
            }) {
                PosTag::In
            } else {
                PosTag::Dt
            }
        }
        PosTag::Nn
            if word == "back"
                && prev_tag.is_some_and(|t| {
                    matches!(t, PosTag::Vb | PosTag::Vbd | PosTag::Vbz | PosTag::Vbg)
                }) =>
        {
            PosTag::Rb
        }
        _ => tag,
    }
}

pub fn pos_tag(text: &TokenizedText) -> PosTagging {
    let mut tags = Vec::with_capacity(text.word_count());
    for &(lo, hi) in &text.sentences {
        let mut prev: Option<(PosTag, String)> = None;
        let mut first_word = true;
        let mut words = Vec::new();
        let mut sentence = Vec::new();
        for token in &text.tokens[lo..hi] {
            if token.kind != TokenKind::Word {
                continue;
            }
            let lower = token.surface.to_lowercase().replace('\u{2019}', "'");
            let tag = tag_word(
                &token.surface,
                first_word,
                prev.as_ref().map(|(t, w)| (*t, w.as_str())),
            );
            sentence.push(tag);
            prev = Some((tag, lower.clone()));
            words.push(lower);
            first_word = false;
        }
        fix_guesses(&words, &mut sentence);
        tags.extend(sentence);
    }
    fix_existential(text, &mut tags);
    PosTagging { tags }
}

const INTENSIFIERS: &[&str] = &[
    "very", "quite", "so", "too", "rather", "extremely", "really", "pretty", "fairly", "somewhat",
    "almost", "highly", "truly",
];

const BE: &[&str] = &[
    "is", "was", "are", "were", "am", "be", "been", "seemed", "seems", "seem", "became",
    "become", "felt", "looked",
];

/// Right-context repair of open-class guesses (words outside the closed
/// lexicon): prenominal modifiers become adjectives, as do predicates after
/// an intensifier or copula; a suffix guess of adjective that heads its
/// noun phrase becomes a noun.
fn fix_guesses(words: &[String], tags: &mut [PosTag]) {
    let first_pass = tags.to_vec();
    let is_noun = |t: PosTag| matches!(t, PosTag::Nn | PosTag::Nns);
    for i in 0..tags.len() {
        if lexicon().contains_key(words[i].as_str()) {
            continue;
        }
        let prev = i.checked_sub(1).map(|j| (tags[j], words[j].as_str()));
        let next = first_pass.get(i + 1).copied();
        let after_det = prev.is_some_and(|(t, _)| t.is_determiner_like());
        let modifier_slot = (after_det || prev.is_some_and(|(_, w)| INTENSIFIERS.contains(&w)))
            && next.is_some_and(is_noun);
        tags[i] = match tags[i] {
            PosTag::Nn | PosTag::Vbd | PosTag::Vbg if modifier_slot => PosTag::Jj,
            PosTag::Rb if modifier_slot && after_det => PosTag::Jj,
            PosTag::Nn
                if prev.is_some_and(|(_, w)| INTENSIFIERS.contains(&w) || BE.contains(&w)) =>
            {
                PosTag::Jj
            }
            PosTag::Jj
                if after_det && !next.is_some_and(|t| is_noun(t) || t == PosTag::Jj) =>
            {
                PosTag::Nn
            }
            t => t,
        };
    }
}

/// "there" is EX before a form of "be" and an adverb otherwise.
fn fix_existential(text: &TokenizedText, tags: &mut [PosTag]) {
    let words: Vec<String> = text.words().map(|t| t.surface.to_lowercase()).collect();
    for i in 0..tags.len() {
        if tags[i] == PosTag::Ex {
            let next = words.get(i + 1).map(String::as_str);
            let be = matches!(
                next,
                Some(
                    "is" | "are"
                        | "was"
                        | "were"
                        | "isn't"
                        | "aren't"
                        | "wasn't"
                        | "weren't"
                        | "will"
                        | "seems"
                        | "must"
                        | "may"
                        | "might"
                )
            );
            if !be {
                tags[i] = PosTag::Rb;
            }
        }
    }
}
