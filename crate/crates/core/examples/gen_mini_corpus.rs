//! Regenerates the bundled mini-corpus (5 authors x 40 blog-style posts) and
//! the two synonym lexicons built from the same word groups.
//!
//!     cargo run -p deobf-core --example gen_mini_corpus
//!
//! Word groups list a plain word first and fancier alternatives after it.
//! `=` links strict synonyms; those pairs also go to the METEOR lexicon.
//! Every group member becomes a related word of every other member in the
//! obfuscation lexicon.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use deobf_core::textproc::{pos_tag, tokenize, CoarsePos, SynonymLexicon};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_230_601;
const DOCS_PER_AUTHOR: usize = 40;
/// chance an open-class slot uses the author's habitual synonym
const LOYALTY: f64 = 0.8;
/// chance a closed-class slot uses one of the author's favourites
const FAVOURITE_RATE: f64 = 0.5;

// Nouns by topic.
const NOUNS: &[(&str, &[&str])] = &[
    (
        "school",
        &[
            "student=pupil|learner|scholar",
            "teacher=instructor|educator|tutor",
            "class=lesson|lecture|seminar",
            "exam=test|assessment|examination",
            "book|volume|textbook|publication",
            "homework=assignment|coursework|prep",
            "campus|grounds|university",
            "grade=mark|score|rating",
            "library|archive|repository",
            "professor|prof|academic|lecturer",
        ],
    ),
    (
        "city",
        &[
            "street|sidewalk|avenue|boulevard",
            "building|structure|edifice|tower",
            "crowd=throng|multitude|gathering",
            "market=marketplace|bazaar|emporium",
            "store=shop|boutique|outlet",
            "park|garden|plaza|square",
            "bridge|overpass|viaduct|crossing",
            "traffic|congestion|gridlock|jam",
            "noise=racket|commotion|clamor",
            "corner|intersection|junction|bend",
        ],
    ),
    (
        "food",
        &[
            "meal|dinner|feast|banquet",
            "bread|loaf|pastry|bun",
            "soup=broth|stew|chowder",
            "drink=beverage|refreshment|tonic",
            "taste=flavor|savor|seasoning",
            "kitchen|galley|scullery|pantry",
            "plate=dish|platter|saucer",
            "recipe|formula|method|procedure",
            "cafe|bistro|restaurant|eatery",
            "cook=chef|caterer|baker",
        ],
    ),
    (
        "travel",
        &[
            "trip=journey|voyage|excursion",
            "car=automobile|vehicle|sedan",
            "road=route|highway|pathway",
            "hotel|inn|lodge|accommodation",
            "map|chart|atlas|guidebook",
            "bag|suitcase|luggage|baggage",
            "ticket|pass|voucher|permit",
            "view=vista|scenery|panorama",
            "coast=shore|seaside|beach",
            "hill|slope|ridge|summit",
        ],
    ),
    (
        "work",
        &[
            "job=occupation|position|profession",
            "boss|manager|supervisor|director",
            "office|workplace|bureau|headquarters",
            "meeting|conference|assembly|session",
            "task=chore|duty|responsibility",
            "plan=scheme|strategy|proposal",
            "report|summary|document|account",
            "team|crew|squad|unit",
            "deadline|cutoff|limit|target",
            "idea=notion|concept|thought",
        ],
    ),
    (
        "home",
        &[
            "house=home|residence|dwelling",
            "room=chamber|space|quarters",
            "friend=companion|comrade|acquaintance",
            "story=tale|narrative|anecdote",
            "problem=issue|difficulty|complication",
            "picture=photo|photograph|image",
            "doll|toy|mannequin|figurine",
            "visitor=guest|pilgrim|caller",
            "scent=smell|odor|aroma|fragrance",
            "layout=design|makeover|arrangement",
        ],
    ),
];

// base verbs; the past tense is derived.
const VERBS: &[&str] = &[
    "visit|tour|inspect|frequent",
    "walk=stroll|wander|march",
    "look=glance|gaze|peer",
    "talk=chat|converse|discuss",
    "finish=complete|conclude|wrap",
    "start=launch|initiate|commence",
    "help=assist|aid|support",
    "try=attempt|endeavor|test",
    "arrange=organize|schedule|plan",
    "cook|prepare|bake|roast",
    "clean|tidy|scrub|wash",
    "fix=repair|mend|restore",
    "learn|study|master|absorb",
    "wait|linger|pause|rest",
    "remain=stay|persist|endure",
    "discover|uncover|detect|notice",
    "explore|examine|investigate|survey",
    "enjoy=appreciate|relish|savor",
    "call|phone|contact|summon",
    "watch=observe|view|monitor",
    "move=shift|relocate|transfer",
    "pick=select|elect|nominate",
    "collect=gather|assemble|accumulate",
    "describe|explain|portray|depict",
    "mention|note|cite|remark",
    "suggest=propose|recommend|advise",
    "expect|anticipate|predict|await",
    "laugh|giggle|chuckle|snicker",
    "ask=inquire|query|request",
    "answer=reply|respond|retort",
    "check=verify|confirm|inspect",
    "love=adore|cherish|treasure",
    "hate=detest|loathe|despise",
    "worry=fret|agonize|brood",
    "hurry=rush|hasten|dash",
    "climb|ascend|scale|mount",
    "carry|haul|transport|convey",
    "borrow|rent|lease|hire",
    "return|revisit|reappear|recur",
    "seem=appear|look|sound",
];

const ADJECTIVES: &[&str] = &[
    "big=large|huge|enormous",
    "small|tiny|minor|compact",
    "good|fine|decent|excellent",
    "bad|poor|awful|dreadful",
    "happy=glad|cheerful|joyful",
    "sad|gloomy|unhappy|miserable",
    "quick=fast|rapid|speedy",
    "slow|sluggish|leisurely|gradual",
    "old|ancient|aged|elderly",
    "new|fresh|novel|modern",
    "busy|hectic|crowded|bustling",
    "quiet=calm|peaceful|tranquil",
    "easy=simple|effortless|painless",
    "hard=difficult|tough|demanding",
    "cheap|inexpensive|affordable|economical",
    "nice|pleasant|lovely|delightful",
    "strange=odd|peculiar|unusual",
    "dirty|messy|filthy|grimy",
    "cold|chilly|icy|frosty",
    "hot|warm|heated|scorching",
    "tired|weary|exhausted|fatigued",
    "smart=clever|bright|intelligent",
    "funny|amusing|comical|hilarious",
    "strong|sturdy|robust|powerful",
    "important|significant|crucial|essential",
    "minimal|slight|negligible|marginal",
    "daunting|intimidating|formidable|overwhelming",
    "sleepy=drowsy|sleepy-eyed|dozy",
    "original|manifest|initial|authentic",
    "beautiful|gorgeous|stunning|attractive",
];

const ADVERBS: &[&str] = &[
    "quickly=rapidly|swiftly|speedily",
    "slowly|gradually|steadily|leisurely",
    "carefully|cautiously|attentively|thoroughly",
    "happily=cheerfully|gladly|joyfully",
    "often=frequently|regularly|repeatedly",
    "suddenly|abruptly|unexpectedly|instantly",
    "finally=eventually|ultimately|lastly",
    "usually=typically|normally|commonly",
    "nearly|roughly|approximately|practically",
    "easily|effortlessly|readily|smoothly",
    "very=extremely|highly|truly",
    "really|genuinely|seriously|honestly",
];

struct Group {
    pos: CoarsePos,
    topic: &'static str,
    words: Vec<&'static str>,
    strict: Vec<(&'static str, &'static str)>,
}

fn parse_group(spec: &'static str, pos: CoarsePos, topic: &'static str) -> Group {
    let mut words = Vec::new();
    let mut strict = Vec::new();
    for part in spec.split('|') {
        let linked: Vec<&str> = part.split('=').collect();
        for pair in linked.windows(2) {
            strict.push((pair[0], pair[1]));
        }
        words.extend(linked);
    }
    Group {
        pos,
        topic,
        words,
        strict,
    }
}

fn groups() -> Vec<Group> {
    let mut out = Vec::new();
    for (topic, specs) in NOUNS {
        out.extend(specs.iter().map(|s| parse_group(s, CoarsePos::Noun, topic)));
    }
    out.extend(VERBS.iter().map(|s| parse_group(s, CoarsePos::Verb, "")));
    out.extend(ADJECTIVES.iter().map(|s| parse_group(s, CoarsePos::Adj, "")));
    out.extend(ADVERBS.iter().map(|s| parse_group(s, CoarsePos::Adv, "")));
    out
}

fn plural(noun: &str) -> String {
    if noun.ends_with('s') || noun.ends_with('x') || noun.ends_with("ch") || noun.ends_with("sh")
    {
        format!("{noun}es")
    } else if noun.ends_with('y') && !noun.ends_with("ay") && !noun.ends_with("ey") {
        format!("{}ies", &noun[..noun.len() - 1])
    } else {
        format!("{noun}s")
    }
}

fn past(verb: &str) -> String {
    const DOUBLE: &[&str] = &["plan", "chat", "stop", "wrap"];
    if DOUBLE.contains(&verb) {
        let last = verb.chars().last().unwrap();
        format!("{verb}{last}ed")
    } else if verb.ends_with('e') {
        format!("{verb}d")
    } else if verb.ends_with('y') && !verb.ends_with("ay") && !verb.ends_with("ey") {
        format!("{}ied", &verb[..verb.len() - 1])
    } else {
        format!("{verb}ed")
    }
}

/// Inflected variants of a group, aligned member by member.
fn forms(group: &Group) -> Vec<Vec<String>> {
    let base: Vec<String> = group.words.iter().map(|w| w.to_string()).collect();
    match group.pos {
        CoarsePos::Noun => vec![base.clone(), base.iter().map(|w| plural(w)).collect()],
        CoarsePos::Verb => vec![base.clone(), base.iter().map(|w| past(w)).collect()],
        _ => vec![base],
    }
}

fn write_lexicons(groups: &[Group], dir: &Path) {
    let mut related: BTreeMap<(String, CoarsePos), Vec<String>> = BTreeMap::new();
    let mut strict: BTreeMap<(String, CoarsePos), Vec<String>> = BTreeMap::new();
    for group in groups {
        let index = |w: &str| group.words.iter().position(|x| *x == w).unwrap();
        for variant in forms(group) {
            for (i, w) in variant.iter().enumerate() {
                let list = related.entry((w.clone(), group.pos)).or_default();
                for (j, other) in variant.iter().enumerate() {
                    if i != j && !list.contains(other) {
                        list.push(other.clone());
                    }
                }
            }
            for (a, b) in &group.strict {
                let (wa, wb) = (&variant[index(a)], &variant[index(b)]);
                for (x, y) in [(wa, wb), (wb, wa)] {
                    let list = strict.entry((x.clone(), group.pos)).or_default();
                    if !list.contains(y) {
                        list.push(y.clone());
                    }
                }
            }
        }
    }
    let render = |version: &str, note: &str, map: &BTreeMap<(String, CoarsePos), Vec<String>>| {
        let mut out = format!("# version: {version}\n# {note}\n# lemma<TAB>pos<TAB>synonyms\n");
        for ((lemma, pos), syns) in map {
            writeln!(out, "{lemma}\t{pos}\t{}", syns.join(",")).unwrap();
        }
        out
    };
    let related_text = render(
        "related-1",
        "Broad related-word lexicon used by the obfuscators.",
        &related,
    );
    let strict_text = render(
        "strict-1",
        "Strict synonym pairs used by the METEOR synonym stage.",
        &strict,
    );
    SynonymLexicon::parse(&related_text).expect("related lexicon parses");
    SynonymLexicon::parse(&strict_text).expect("strict lexicon parses");
    fs::write(dir.join("lexicon_related.tsv"), related_text).unwrap();
    fs::write(dir.join("lexicon_strict.tsv"), strict_text).unwrap();
}

/// Per-author habits. Probabilities are jittered per document.
struct Style {
    name: &'static str,
    /// 0 favours the shortest synonyms, 1 the longest
    register: f64,
    /// chance a contractible pair is contracted
    contract: f64,
    markers: &'static [&'static str],
    marker_rate: f64,
    paren_rate: f64,
    exclaim: f64,
    question: f64,
    semicolon: f64,
    digits: f64,
    caps: f64,
    /// clauses per sentence (min, max)
    clauses: (usize, usize),
    sentences: (usize, usize),
    intensifiers: &'static [&'static str],
    subjects: &'static [&'static str],
    joiners: &'static [&'static str],
    topics: &'static [&'static str],
    /// seeds the habitual synonym choice
    quirk: u64,
}

const STYLES: &[Style] = &[
    Style {
        name: "author01",
        register: 0.25,
        contract: 0.7,
        markers: &["anyway", "of course", "actually", "by the way"],
        marker_rate: 0.25,
        paren_rate: 0.2,
        exclaim: 0.2,
        question: 0.05,
        semicolon: 0.0,
        digits: 0.05,
        caps: 0.03,
        clauses: (1, 2),
        sentences: (8, 12),
        intensifiers: &["really", "so", "pretty", "just"],
        subjects: &["I", "we", "my friend", "my sister"],
        joiners: &[", and", ", but", ", so"],
        topics: &["food", "home", "city"],
        quirk: 11,
    },
    Style {
        name: "author02",
        register: 0.7,
        contract: 0.3,
        markers: &["however", "moreover", "furthermore", "indeed"],
        marker_rate: 0.25,
        paren_rate: 0.05,
        exclaim: 0.0,
        question: 0.03,
        semicolon: 0.2,
        digits: 0.05,
        caps: 0.0,
        clauses: (2, 3),
        sentences: (6, 9),
        intensifiers: &["quite", "rather", "very", "somewhat"],
        subjects: &["the committee", "one", "the author", "they"],
        joiners: &[", whereas", ", although", "; thus", ", and"],
        topics: &["work", "school", "travel"],
        quirk: 23,
    },
    Style {
        name: "author03",
        register: 0.5,
        contract: 0.6,
        markers: &["for example", "in fact", "basically", "of course"],
        marker_rate: 0.2,
        paren_rate: 0.35,
        exclaim: 0.03,
        question: 0.05,
        semicolon: 0.05,
        digits: 0.35,
        caps: 0.0,
        clauses: (1, 3),
        sentences: (7, 11),
        intensifiers: &["very", "fairly", "quite", "just"],
        subjects: &["you", "we", "I", "the team"],
        joiners: &[", and", ", so", ", because", ", then"],
        topics: &["work", "travel", "food"],
        quirk: 37,
    },
    Style {
        name: "author04",
        register: 0.4,
        contract: 0.4,
        markers: &["still", "though", "then again", "of course"],
        marker_rate: 0.2,
        paren_rate: 0.1,
        exclaim: 0.08,
        question: 0.08,
        semicolon: 0.03,
        digits: 0.05,
        caps: 0.0,
        clauses: (1, 3),
        sentences: (8, 11),
        intensifiers: &["very", "almost", "quite", "really"],
        subjects: &["she", "he", "they", "my neighbor"],
        joiners: &[", and", ", but", ", while", ", until"],
        topics: &["home", "city", "school"],
        quirk: 41,
    },
    Style {
        name: "author05",
        register: 0.55,
        contract: 0.5,
        markers: &["honestly", "frankly", "however", "in fact"],
        marker_rate: 0.25,
        paren_rate: 0.15,
        exclaim: 0.1,
        question: 0.2,
        semicolon: 0.05,
        digits: 0.1,
        caps: 0.05,
        clauses: (1, 2),
        sentences: (7, 11),
        intensifiers: &["very", "really", "too", "extremely"],
        subjects: &["I", "you", "we", "everyone"],
        joiners: &[", but", ", and", ", yet", ", or"],
        topics: &["food", "travel", "school"],
        quirk: 59,
    },
];

struct Bank<'a> {
    subjects: Vec<&'static str>,
    joiners: Vec<&'static str>,
    intensifiers: Vec<&'static str>,
    nouns: BTreeMap<&'a str, Vec<&'a Group>>,
    verbs: Vec<&'a Group>,
    adjs: Vec<&'a Group>,
    advs: Vec<&'a Group>,
}

struct Writer<'a> {
    rng: ChaCha8Rng,
    style: &'a Style,
    bank: &'a Bank<'a>,
    loyalty: f64,
    contract: f64,
    marker_rate: f64,
    paren_rate: f64,
    topics: Vec<&'a str>,
}

fn jitter(rng: &mut ChaCha8Rng, p: f64, spread: f64) -> f64 {
    (p + rng.gen_range(-spread..=spread)).clamp(0.0, 1.0)
}

fn cap(s: &str) -> String {
    deobf_core::textproc::capitalize(s)
}

impl<'a> Writer<'a> {
    /// Each author has a habitual member per group: a hash-chosen word
    /// near the length rank its register favours.
    fn preferred(&self, group: &Group) -> usize {
        let n = group.words.len();
        let mut by_len: Vec<usize> = (0..n).collect();
        by_len.sort_by_key(|&i| (group.words[i].len(), i));
        let target = (self.style.register * (n - 1) as f64).round() as usize;
        let near: Vec<usize> = (target.saturating_sub(1)..=(target + 1).min(n - 1))
            .map(|r| by_len[r])
            .collect();
        let h = group
            .words[0]
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64 ^ self.style.quirk, |h, b| {
                (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
            });
        near[(h % near.len() as u64) as usize]
    }

    fn pick_word(&mut self, group: &Group) -> &'static str {
        if self.rng.gen_bool(self.loyalty) {
            group.words[self.preferred(group)]
        } else {
            group.words.choose(&mut self.rng).unwrap()
        }
    }

    /// Closed-class choices come from pools shared by every author, with
    /// the author's favourites drawn more often.
    fn shared(&mut self, pool: &[&'static str], favourites: &[&'static str]) -> &'static str {
        if self.rng.gen_bool(FAVOURITE_RATE) {
            favourites.choose(&mut self.rng).unwrap()
        } else {
            pool.choose(&mut self.rng).unwrap()
        }
    }

    fn noun_group(&mut self) -> &'a Group {
        let topic = *self.topics.choose(&mut self.rng).unwrap();
        self.bank.nouns[topic].choose(&mut self.rng).unwrap()
    }

    fn noun(&mut self, plural_form: bool) -> String {
        let g = self.noun_group();
        let w = self.pick_word(g);
        if plural_form {
            plural(w)
        } else {
            w.to_string()
        }
    }

    fn adj(&mut self) -> String {
        let g = *self.bank.adjs.choose(&mut self.rng).unwrap();
        self.pick_word(g).to_string()
    }

    fn adv(&mut self) -> String {
        let g = *self.bank.advs.choose(&mut self.rng).unwrap();
        self.pick_word(g).to_string()
    }

    fn verb(&mut self) -> &'static str {
        let g = *self.bank.verbs.choose(&mut self.rng).unwrap();
        self.pick_word(g)
    }

    fn intensifier(&mut self) -> &'static str {
        let pool = self.bank.intensifiers.clone();
        self.shared(&pool, self.style.intensifiers)
    }

    fn number(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(2..12).to_string(),
            1 => format!("{}0", self.rng.gen_range(2..10)),
            2 => format!("${}", self.rng.gen_range(5..90)),
            _ => format!("{}", self.rng.gen_range(2005..2023)),
        }
    }

    fn np(&mut self) -> String {
        let plural_form = self.rng.gen_bool(0.3);
        let det = if plural_form {
            *["the", "some", "those", "many", "a few"]
                .choose(&mut self.rng)
                .unwrap()
        } else {
            *["the", "a", "this", "that", "my", "our", "every"]
                .choose(&mut self.rng)
                .unwrap()
        };
        let det = if det == "a" { "a" } else { det };
        let mut out = String::from(det);
        if self.rng.gen_bool(0.7) {
            if self.rng.gen_bool(0.25) {
                out.push(' ');
                out.push_str(self.intensifier());
            }
            out.push(' ');
            out.push_str(&self.adj());
            if self.rng.gen_bool(0.35) {
                out.push(' ');
                out.push_str(&self.adj());
            }
        }
        if plural_form && self.rng.gen_bool(self.style.digits) {
            out = self.number();
            if out.starts_with('$') {
                out = format!("{} worth of", out);
            }
        }
        out.push(' ');
        out.push_str(&self.noun(plural_form));
        if det == "a" {
            let first = out[2..].chars().next().unwrap_or('x');
            if "aeiou".contains(first) {
                out.insert(1, 'n');
            }
        }
        out
    }

    fn pp(&mut self) -> String {
        let prep = *["in", "near", "at", "behind", "around", "with", "for", "from", "across"]
            .choose(&mut self.rng)
            .unwrap();
        format!("{prep} {}", self.np())
    }

    fn subject(&mut self) -> String {
        if self.rng.gen_bool(0.4) {
            self.pronoun().to_string()
        } else {
            self.np()
        }
    }

    fn pronoun(&mut self) -> &'static str {
        let pool = self.bank.subjects.clone();
        self.shared(&pool, self.style.subjects)
    }

    /// Pronoun + auxiliary, contracted or not.
    fn aux(&mut self, pronoun: &str, full: &str, short: &str) -> String {
        if self.rng.gen_bool(self.contract) {
            format!("{pronoun}{short}")
        } else {
            format!("{pronoun} {full}")
        }
    }

    fn clause(&mut self) -> String {
        match self.rng.gen_range(0..9) {
            0..=2 => {
                let mut c = format!("{} {} {}", self.subject(), past(self.verb()), self.np());
                if self.rng.gen_bool(0.5) {
                    c = format!("{c} {}", self.pp());
                }
                if self.rng.gen_bool(0.7) {
                    c = format!("{c} {}", self.adv());
                }
                c
            }
            3 => {
                let be = if self.rng.gen_bool(0.5) { "was" } else { "seemed" };
                let i = self.intensifier();
                format!("{} {be} {i} {}", self.np(), self.adj())
            }
            4 => {
                let (p, full, short) = *[
                    ("it", "is", "'s"),
                    ("I", "am", "'m"),
                    ("they", "are", "'re"),
                    ("we", "are", "'re"),
                    ("that", "is", "'s"),
                    ("you", "are", "'re"),
                ]
                .choose(&mut self.rng)
                .unwrap();
                let head = self.aux(p, full, short);
                let i = self.intensifier();
                format!("{head} {i} {}", self.adj())
            }
            5 => {
                let (p, full, short) = *[
                    ("we", "have", "'ve"),
                    ("I", "have", "'ve"),
                    ("they", "have", "'ve"),
                    ("I", "would", "'d"),
                    ("we", "will", "'ll"),
                    ("I", "will", "'ll"),
                ]
                .choose(&mut self.rng)
                .unwrap();
                let head = self.aux(p, full, short);
                let verb = if full == "have" {
                    past(self.verb())
                } else {
                    self.verb().to_string()
                };
                format!("{head} {verb} {}", self.np())
            }
            6 => {
                let neg = if self.rng.gen_bool(self.contract) {
                    *["didn't", "don't", "can't", "won't"]
                        .choose(&mut self.rng)
                        .unwrap()
                } else {
                    *["did not", "do not", "cannot", "will not"]
                        .choose(&mut self.rng)
                        .unwrap()
                };
                let s = self.pronoun().to_string();
                format!("{s} {neg} {} {}", self.verb(), self.np())
            }
            7 => {
                let modal = *["can", "could", "should", "might", "must"]
                    .choose(&mut self.rng)
                    .unwrap();
                format!("{} {modal} {} {}", self.subject(), self.verb(), self.np())
            }
            _ => {
                let a = self.adv();
                format!(
                    "{a} {} {} {}",
                    self.subject(),
                    past(self.verb()),
                    self.np()
                )
            }
        }
    }

    fn question(&mut self) -> String {
        match self.rng.gen_range(0..3) {
            0 => format!("Why did {} {} {}?", self.subject(), self.verb(), self.np()),
            1 => format!("Have you {} {}?", past(self.verb()), self.np()),
            _ => format!("Is {} {} {}?", self.np(), self.intensifier(), self.adj()),
        }
    }

    fn parenthetical(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => format!("({} {})", self.adj(), self.noun(false)),
            1 => format!("(about {} {})", self.number(), self.noun(true)),
            2 => format!("(or so {} thought)", self.style.subjects[0]),
            _ => format!("(see {})", self.np()),
        }
    }

    fn sentence(&mut self) -> String {
        if self.rng.gen_bool(self.style.question) {
            return self.question();
        }
        let (lo, hi) = self.style.clauses;
        let n = self.rng.gen_range(lo..=hi);
        let mut body = self.clause();
        for _ in 1..n {
            let joiner = if self.rng.gen_bool(self.style.semicolon) {
                ";"
            } else {
                let pool = self.bank.joiners.clone();
                self.shared(&pool, self.style.joiners)
            };
            body = format!("{body}{joiner} {}", self.clause());
        }
        if self.rng.gen_bool(self.paren_rate) {
            let words: Vec<&str> = body.split(' ').collect();
            let at = self.rng.gen_range(1..=words.len());
            let paren = self.parenthetical();
            let mut parts = words[..at].join(" ");
            parts.push(' ');
            parts.push_str(&paren);
            if at < words.len() {
                parts.push(' ');
                parts.push_str(&words[at..].join(" "));
            }
            body = parts;
        }
        let end = if self.rng.gen_bool(self.style.exclaim) {
            "!"
        } else {
            "."
        };
        if self.rng.gen_bool(self.marker_rate) {
            let marker = *self.style.markers.choose(&mut self.rng).unwrap();
            match self.rng.gen_range(0..3) {
                0 => body = format!("{}, {body}", cap(marker)),
                1 if body.contains(", ") => {
                    body = body.replacen(", ", &format!(", {marker}, "), 1);
                }
                _ => {
                    return format!("{}, {marker}{end}", cap(&body));
                }
            }
        }
        if self.rng.gen_bool(self.style.caps) {
            let words: Vec<String> = body.split(' ').map(String::from).collect();
            let k = self.rng.gen_range(0..words.len());
            let shouted: Vec<String> = words
                .into_iter()
                .enumerate()
                .map(|(i, w)| if i == k && w.len() > 2 { w.to_uppercase() } else { w })
                .collect();
            body = shouted.join(" ");
        }
        format!("{}{end}", cap(&body))
    }

    fn document(&mut self) -> String {
        let (lo, hi) = self.style.sentences;
        let n = self.rng.gen_range(lo..=hi);
        let mut sentences = Vec::new();
        for _ in 0..n {
            sentences.push(self.sentence());
        }
        // Short posts break into two paragraphs.
        let mid = n / 2;
        format!(
            "{}\n\n{}\n",
            sentences[..mid].join(" "),
            sentences[mid..].join(" ")
        )
    }
}

/// Share of open-class words the tagger assigns the lexicon's part of speech.
fn coverage(text: &str, lexicon: &SynonymLexicon) -> (usize, usize) {
    let tt = tokenize(text);
    let tags = pos_tag(&tt).tags;
    let mut hit = 0;
    let mut words = 0;
    for (token, tag) in tt.words().zip(tags) {
        words += 1;
        if let Some(pos) = tag.coarse() {
            if !lexicon.synonyms(&token.surface, Some(pos)).is_empty() {
                hit += 1;
            }
        }
    }
    (hit, words)
}

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let groups = groups();
    write_lexicons(&groups, &data);
    let related = SynonymLexicon::load(&data.join("lexicon_related.tsv")).unwrap();

    let pool = |f: fn(&Style) -> &'static [&'static str]| {
        let mut v: Vec<&'static str> = STYLES.iter().flat_map(f).copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut bank = Bank {
        subjects: pool(|s| s.subjects),
        joiners: pool(|s| s.joiners),
        intensifiers: pool(|s| s.intensifiers),
        nouns: BTreeMap::new(),
        verbs: Vec::new(),
        adjs: Vec::new(),
        advs: Vec::new(),
    };
    for g in &groups {
        match g.pos {
            CoarsePos::Noun => bank.nouns.entry(g.topic).or_default().push(g),
            CoarsePos::Verb => bank.verbs.push(g),
            CoarsePos::Adj => bank.adjs.push(g),
            CoarsePos::Adv => bank.advs.push(g),
        }
    }
    // "very" and "really" double as intensifiers; keep the adverb groups
    // for slot filling only when they are -ly words.
    bank.advs.retain(|g| g.words[0].ends_with("ly") || g.words[0] == "often");

    let root = data.join("mini_corpus");
    if root.exists() {
        fs::remove_dir_all(&root).unwrap();
    }
    let (mut hit, mut words) = (0, 0);
    for (a, style) in STYLES.iter().enumerate() {
        let dir = root.join(style.name);
        fs::create_dir_all(&dir).unwrap();
        for d in 0..DOCS_PER_AUTHOR {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ ((a as u64) << 32) ^ d as u64);
            let loyalty = jitter(&mut rng, LOYALTY, 0.15);
            let contract = jitter(&mut rng, style.contract, 0.15);
            let marker_rate = jitter(&mut rng, style.marker_rate, 0.15);
            let paren_rate = jitter(&mut rng, style.paren_rate, 0.15);
            let mut topics: Vec<&str> = style.topics.to_vec();
            // one topic outside the author's usual range
            let all: Vec<&str> = bank.nouns.keys().copied().collect();
            topics.push(all[rng.gen_range(0..all.len())]);
            topics.shuffle(&mut rng);
            topics.truncate(2);
            let mut writer = Writer {
                rng,
                style,
                bank: &bank,
                loyalty,
                contract,
                marker_rate,
                paren_rate,
                topics,
            };
            let text = writer.document();
            let (h, w) = coverage(&text, &related);
            hit += h;
            words += w;
            fs::write(dir.join(format!("{}-{:02}.txt", style.name, d + 1)), text).unwrap();
        }
    }
    println!(
        "wrote {} documents; replaceable words {hit}/{words} ({:.1}%)",
        STYLES.len() * DOCS_PER_AUTHOR,
        100.0 * hit as f64 / words as f64
    );
}
