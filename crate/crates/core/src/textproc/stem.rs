//! Porter suffix-stripping stemmer.
//!
//! One Porter pass is not idempotent ("agreed" -> "agre" -> "agr"), so
//! [`stem`] applies the pass until the word stops changing. Each pass never
//! lengthens the word, so the loop terminates.

/// Lowercased, idempotent stem of `word`.
pub fn stem(word: &str) -> String {
    let lower = word.to_lowercase();
    if !lower.bytes().all(|b| b.is_ascii_lowercase()) {
        return lower;
    }
    let mut current = lower.into_bytes();
    loop {
        let next = porter(&current);
        if next == current {
            break;
        }
        current = next;
    }
    String::from_utf8(current).expect("ascii")
}

struct Stemmer {
    b: Vec<u8>,
    /// End of the word (inclusive index).
    k: usize,
    /// End of the stem under consideration (inclusive index).
    j: usize,
}

fn porter(word: &[u8]) -> Vec<u8> {
    if word.len() <= 2 {
        return word.to_vec();
    }
    let mut s = Stemmer {
        b: word.to_vec(),
        k: word.len() - 1,
        j: 0,
    };
    s.step1ab();
    if s.k > 1 {
        s.step1c();
        s.step2();
        s.step3();
        s.step4();
        s.step5();
    }
    s.b.truncate(s.k + 1);
    s.b
}

impl Stemmer {
    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in b[0..=j].
    fn m(&self) -> usize {
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > self.j {
                return n;
            }
            if !self.cons(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > self.j {
                    return n;
                }
                if self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > self.j {
                    return n;
                }
                if !self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.cons(i))
    }

    fn double_c(&self, j: usize) -> bool {
        j >= 1 && self.b[j] == self.b[j - 1] && self.cons(j)
    }

    /// consonant-vowel-consonant ending at i, last consonant not w, x or y.
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, s: &[u8]) -> bool {
        let len = s.len();
        if len > self.k + 1 {
            return false;
        }
        if &self.b[self.k + 1 - len..=self.k] != s {
            return false;
        }
        self.j = self.k.wrapping_sub(len);
        true
    }

    /// Replace b[j+1..=k] with `s`.
    fn set_to(&mut self, s: &[u8]) {
        let start = self.j.wrapping_add(1);
        self.b.truncate(start);
        self.b.extend_from_slice(s);
        self.k = start + s.len() - 1;
    }

    fn r(&mut self, s: &[u8]) {
        if self.stem_nonempty() && self.m() > 0 {
            self.set_to(s);
        }
    }

    /// `ends` can leave j at usize::MAX when the suffix is the whole word.
    fn stem_nonempty(&self) -> bool {
        self.j != usize::MAX
    }

    fn step1ab(&mut self) {
        if self.b[self.k] == b's' {
            if self.ends(b"sses") {
                self.k -= 2;
            } else if self.ends(b"ies") {
                self.set_to(b"i");
            } else if self.k >= 1 && self.b[self.k - 1] != b's' {
                self.k -= 1;
            }
        }
        if self.ends(b"eed") {
            if self.stem_nonempty() && self.m() > 0 {
                self.k -= 1;
            }
        } else if (self.ends(b"ed") || self.ends(b"ing"))
            && self.stem_nonempty()
            && self.vowel_in_stem()
        {
            self.k = self.j;
            if self.ends(b"at") {
                self.set_to(b"ate");
            } else if self.ends(b"bl") {
                self.set_to(b"ble");
            } else if self.ends(b"iz") {
                self.set_to(b"ize");
            } else if self.double_c(self.k) {
                self.k -= 1;
                if matches!(self.b[self.k], b'l' | b's' | b'z') {
                    self.k += 1;
                }
            } else {
                self.j = self.k;
                if self.m() == 1 && self.cvc(self.k) {
                    self.set_to(b"e");
                }
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends(b"y") && self.stem_nonempty() && self.vowel_in_stem() {
            self.b[self.k] = b'i';
        }
    }

    fn step2(&mut self) {
        if self.k < 1 {
            return;
        }
        const RULES: &[(&[u8], &[u8])] = &[
            (b"ational", b"ate"),
            (b"tional", b"tion"),
            (b"enci", b"ence"),
            (b"anci", b"ance"),
            (b"izer", b"ize"),
            (b"bli", b"ble"),
            (b"alli", b"al"),
            (b"entli", b"ent"),
            (b"eli", b"e"),
            (b"ousli", b"ous"),
            (b"ization", b"ize"),
            (b"ation", b"ate"),
            (b"ator", b"ate"),
            (b"alism", b"al"),
            (b"iveness", b"ive"),
            (b"fulness", b"ful"),
            (b"ousness", b"ous"),
            (b"aliti", b"al"),
            (b"iviti", b"ive"),
            (b"biliti", b"ble"),
            (b"logi", b"log"),
        ];
        self.apply_first(RULES);
    }

    fn step3(&mut self) {
        const RULES: &[(&[u8], &[u8])] = &[
            (b"icate", b"ic"),
            (b"ative", b""),
            (b"alize", b"al"),
            (b"iciti", b"ic"),
            (b"ical", b"ic"),
            (b"ful", b""),
            (b"ness", b""),
        ];
        self.apply_first(RULES);
    }

    fn apply_first(&mut self, rules: &[(&[u8], &[u8])]) {
        for (suffix, replacement) in rules {
            if self.ends(suffix) {
                self.r(replacement);
                return;
            }
        }
    }

    fn step4(&mut self) {
        if self.k < 1 {
            return;
        }
        const SUFFIXES: &[&[u8]] = &[
            b"al", b"ance", b"ence", b"er", b"ic", b"able", b"ible", b"ant", b"ement", b"ment",
            b"ent", b"ion", b"ou", b"ism", b"ate", b"iti", b"ous", b"ive", b"ize",
        ];
        for suffix in SUFFIXES {
            if self.ends(suffix) {
                if *suffix == b"ion" {
                    let ok = self.stem_nonempty()
                        && matches!(self.b[self.j], b's' | b't')
                        && self.m() > 1;
                    if ok {
                        self.k = self.j;
                    }
                    return;
                }
                // "ement" beats "ment" beats "ent": the first matching
                // suffix in this order is the longest one.
                if self.stem_nonempty() && self.m() > 1 {
                    self.k = self.j;
                }
                return;
            }
        }
    }

    fn step5(&mut self) {
        self.j = self.k;
        if self.b[self.k] == b'e' {
            self.j = self.k - 1;
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.b[self.k] == b'l' && self.double_c(self.k) {
            self.j = self.k;
            if self.m() > 1 {
                self.k -= 1;
            }
        }
    }
}
