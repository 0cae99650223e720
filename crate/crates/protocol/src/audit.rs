//! Honest-but-curious audit of a finished run. Every observer's view is cut out
//! of the transcript; the ground truth is only used to build and check the
//! alternative assignments.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use phe::{ring_to_signed, word_to_ring, Ciphertext, FixedPointCodec, PaillierPrivateKey, PaillierPublicKey};
use serde::Serialize;

use crate::exchange::{ComposedWitness, GroundTruth, ProtocolExchange};
use crate::message::{Envelope, Observer, Party, Payload, Phase};

/// Unknowns against independent equations for one kind of stream seen by one observer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingCheck {
    pub observer: String,
    pub stream: String,
    pub streams: usize,
    pub equations: usize,
    pub unknowns: usize,
    /// smallest unknowns − equations over the streams
    pub min_margin: i64,
    pub passed: bool,
}

/// A second assignment of secrets and states rebuilt through the real arithmetic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlternativeCheck {
    pub observer: String,
    pub view: String,
    pub observations: usize,
    /// observations whose assignment differs from the truth
    pub changed: usize,
    pub byte_identical: bool,
    /// X^r = X^l on an entry, which pins the neighbour's state (the stated exception)
    pub degenerate: usize,
    /// observations where the true factor is the only one in the public range dividing the plaintext
    pub range_identifiable: usize,
    pub passed: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EavesdropperCheck {
    pub messages: usize,
    pub ciphertexts: usize,
    pub decodable: usize,
    pub invalid: usize,
    pub secure_seen: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignCheck {
    pub entries: usize,
    pub mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Freshness {
    pub scalar_pairs: usize,
    pub scalar_repeats: usize,
    pub vector_pairs: usize,
    pub vector_repeats: usize,
}

impl Freshness {
    pub fn vector_repeat_rate(&self) -> f64 {
        if self.vector_pairs == 0 { 0.0 } else { self.vector_repeats as f64 / self.vector_pairs as f64 }
    }

    pub fn scalar_repeat_rate(&self) -> f64 {
        if self.scalar_pairs == 0 { 0.0 } else { self.scalar_repeats as f64 / self.scalar_pairs as f64 }
    }
}

/// How tightly an agent's sign messages bracket the neighbour constant it was compared against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignBracket {
    pub observer: String,
    pub constants: usize,
    /// constants with both a lower and an upper bound
    pub bracketed: usize,
    pub median_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub counting: Vec<CountingCheck>,
    pub alternatives: Vec<AlternativeCheck>,
    pub eavesdropper: EavesdropperCheck,
    pub signs: SignCheck,
    pub freshness: Freshness,
    pub brackets: Vec<SignBracket>,
}

impl AuditReport {
    /// One line per failed check, naming the observer and what leaked.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.counting.iter().filter(|c| !c.passed) {
            out.push(format!("{}: {} has {} equations for {} unknowns", c.observer, c.stream, c.equations, c.unknowns));
        }
        for a in self.alternatives.iter().filter(|a| !a.passed) {
            out.push(format!("{}: {} identifiable ({})", a.observer, a.view, a.note));
        }
        let e = &self.eavesdropper;
        if !e.passed {
            out.push(format!("eavesdropper: {} decodable, {} invalid ciphertexts, {} secure messages visible", e.decodable, e.invalid, e.secure_seen));
        }
        if self.signs.mismatches > 0 {
            out.push(format!("operator: {} sign messages disagree with the true difference", self.signs.mismatches));
        }
        if self.freshness.vector_repeat_rate() > 1e-3 {
            out.push(format!("factors: {} of {} consecutive factor vectors repeat", self.freshness.vector_repeats, self.freshness.vector_pairs));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn counting_passed(&self) -> bool {
        self.counting.iter().all(|c| c.passed)
    }

    pub fn alternatives_passed(&self) -> bool {
        self.alternatives.iter().all(|a| a.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Ctx<'a> {
    log: &'a [Envelope],
    truth: &'a GroundTruth,
    codec: FixedPointCodec,
    range: (u64, u64),
    n_regions: usize,
}

impl Ctx<'_> {
    fn keys(&self, id: &str) -> (&PaillierPublicKey, &PaillierPrivateKey) {
        let (pk, sk) = &self.truth.keys[id];
        (pk, sk)
    }

    fn key_id(e: &Envelope) -> &str {
        match &e.payload {
            Payload::EncryptedBoundary { key_id, .. } | Payload::EncryptedWeightedDiff { key_id, .. } | Payload::DualWeightedDiff { key_id, .. } => key_id,
            _ => "",
        }
    }

    fn view(&self, o: Observer) -> impl Iterator<Item = &Envelope> {
        self.log.iter().filter(move |e| e.visible_to(o))
    }

    fn composed(&self, e: &Envelope, pos: usize) -> (&ComposedWitness, i128) {
        let c = &self.truth.composed[&(e.seq, pos)];
        let s = &self.truth.sealed[&c.source];
        (c, s.word)
    }
}

fn encrypt(pk: &PaillierPublicKey, w: i128, nonce: &BigUint) -> Ciphertext {
    pk.encrypt(&word_to_ring(w, &pk.n), nonce).expect("valid witness")
}

fn rebuild(pk: &PaillierPublicKey, first: (i128, &BigUint), second: (i128, &BigUint), factor: u64) -> String {
    let sum = pk.add(&encrypt(pk, first.0, first.1), &encrypt(pk, second.0, second.1)).expect("same key");
    pk.scale(&sum, factor).expect("positive factor").to_hex()
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let (a, m) = (BigInt::from(a.clone()), BigInt::from(m.clone()));
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(&m).to_biguint().expect("non-negative"))
}

fn counting(ctx: &Ctx) -> Vec<CountingCheck> {
    let mut out = Vec::new();
    // operator: K decrypted c(k)·(X^r(k) − X^l(t)) against c(k), X^r(k) per k and one X^l(t)
    let mut op: BTreeMap<(usize, usize, usize, usize), usize> = BTreeMap::new();
    for e in ctx.view(Observer::Party(Party::Operator)) {
        if let Payload::EncryptedWeightedDiff { ciphertexts, .. } = &e.payload {
            for pos in 0..ciphertexts.len() {
                *op.entry((e.meta.t, e.meta.r, e.meta.l, pos)).or_default() += 1;
            }
        }
    }
    out.push(summarize("operator", "primal weighted differences", op.values().map(|&k| (k, 2 * k + 1))));

    for r in 0..ctx.n_regions {
        let me = Party::Agent(r);
        let name = me.to_string();
        // own-key dual replies: a_{l↦r}(t)·(X^l(t) − X^r(t)) over t, unknowns a(t) and X^l(t)
        let mut dual: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        // sign replies: no equations, unknowns c(k) per k and X^l(t)
        let mut signs: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
        // ciphertexts under a neighbour's key: no equations
        let mut foreign: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in ctx.view(Observer::Party(me)).filter(|e| e.to == me) {
            match &e.payload {
                Payload::DualWeightedDiff { ciphertexts, .. } => {
                    for pos in 0..ciphertexts.len() {
                        *dual.entry((e.meta.l, pos)).or_default() += 1;
                    }
                }
                Payload::SignMessage { signs: s } => {
                    for pos in 0..s.len() {
                        *signs.entry((e.meta.t, e.meta.l, pos)).or_default() += 1;
                    }
                }
                Payload::EncryptedBoundary { ciphertexts, .. } => {
                    for pos in 0..ciphertexts.len() {
                        *foreign.entry((e.meta.r, pos)).or_default() += 1;
                    }
                }
                _ => {}
            }
        }
        out.push(summarize(&name, "dual weighted differences", dual.values().map(|&n| (n, 2 * n))));
        out.push(summarize(&name, "sign messages", signs.values().map(|&k| (0, k + 1))));
        out.push(summarize(&name, "neighbour ciphertexts", foreign.values().map(|&n| (0, n))));
    }
    out
}

fn summarize(observer: &str, stream: &str, rows: impl Iterator<Item = (usize, usize)>) -> CountingCheck {
    let (mut streams, mut eq, mut unk, mut margin) = (0, 0, 0, i64::MAX);
    for (e, u) in rows {
        streams += 1;
        eq += e;
        unk += u;
        margin = margin.min(u as i64 - e as i64);
    }
    let min_margin = if streams == 0 { 0 } else { margin };
    CountingCheck { observer: observer.into(), stream: stream.into(), streams, equations: eq, unknowns: unk, min_margin, passed: streams == 0 || min_margin > 0 }
}

/// Operator: shift every X^r(k) and X^l(t) by the same δ. Sums and nonces are
/// unchanged, so each ciphertext is rebuilt byte for byte.
fn operator_alternative(ctx: &Ctx) -> AlternativeCheck {
    const DELTA: i128 = 7_919;
    let (mut n, mut same) = (0, true);
    for e in ctx.view(Observer::Party(Party::Operator)) {
        if let Payload::EncryptedWeightedDiff { ciphertexts, .. } = &e.payload {
            let (pk, _) = ctx.keys(Ctx::key_id(e));
            for (pos, logged) in ciphertexts.iter().enumerate() {
                let (c, wr) = ctx.composed(e, pos);
                let s = &ctx.truth.sealed[&c.source];
                same &= rebuild(pk, (wr + DELTA, &s.nonce), (-(c.word + DELTA), &c.nonce), c.factor) == *logged;
                n += 1;
            }
        }
    }
    AlternativeCheck {
        observer: "operator".into(),
        view: "primal weighted differences".into(),
        observations: n,
        changed: n,
        byte_identical: same,
        degenerate: 0,
        range_identifiable: 0,
        passed: same && n > 0,
        note: format!("all states shifted by {DELTA} codec quanta"),
    }
}

/// Agent r, dual replies: for m = a·(w_l − w_r) pick a' ≠ a dividing m, set
/// w_l' = w_r + m/a' and ρ_l' = (ρ_r ρ_l)^{a/a' mod λ} ρ_r^{-1}.
fn dual_alternative(ctx: &Ctx, r: usize) -> AlternativeCheck {
    let me = Party::Agent(r);
    let limit = 1i128 << (ctx.codec.word_bits - 1);
    let (mut n, mut changed, mut degenerate, mut identifiable, mut same) = (0, 0, 0, 0, true);
    let mut out_of_range = 0;
    for e in ctx.view(Observer::Party(me)).filter(|e| e.to == me) {
        let Payload::DualWeightedDiff { ciphertexts, .. } = &e.payload else { continue };
        let (pk, sk) = ctx.keys(Ctx::key_id(e));
        for (pos, logged) in ciphertexts.iter().enumerate() {
            n += 1;
            let (c, neg_wr) = ctx.composed(e, pos);
            let s = &ctx.truth.sealed[&c.source];
            let wr = -neg_wr;
            let m = c.factor as i128 * (c.word - wr);
            if m == 0 {
                degenerate += 1;
                same &= rebuild(pk, (neg_wr, &s.nonce), (c.word, &c.nonce), c.factor) == *logged;
                continue;
            }
            let usable = |a: u64| {
                a != c.factor && m % a as i128 == 0 && BigUint::from(a).gcd(&sk.lambda).is_one() && (wr + m / a as i128).abs() < limit
            };
            let in_range = (ctx.range.0..=ctx.range.1).find(|&a| usable(a));
            if in_range.is_none() {
                identifiable += 1;
            }
            let alt = in_range.or_else(|| {
                out_of_range += 1;
                (1..=100_000u64).find(|&a| usable(a))
            });
            let Some(a2) = alt else {
                same &= rebuild(pk, (neg_wr, &s.nonce), (c.word, &c.nonce), c.factor) == *logged;
                continue;
            };
            let inv = mod_inverse(&BigUint::from(a2), &sk.lambda).expect("checked coprime");
            let exp = (BigUint::from(c.factor) * inv) % &sk.lambda;
            let rr_inv = mod_inverse(&s.nonce, &pk.n).expect("nonce is a unit");
            let nonce = ((&s.nonce * &c.nonce) % &pk.n).modpow(&exp, &pk.n) * rr_inv % &pk.n;
            let wl2 = wr + m / a2 as i128;
            same &= rebuild(pk, (neg_wr, &s.nonce), (wl2, &nonce), a2) == *logged;
            changed += 1;
        }
    }
    let note = if n > 0 && changed == 0 {
        "no alternative factor divides any observation".to_string()
    } else {
        format!("{out_of_range} alternatives use a factor outside the public range")
    };
    AlternativeCheck {
        observer: me.to_string(),
        view: "dual weighted differences".into(),
        observations: n,
        changed,
        byte_identical: same,
        degenerate,
        range_identifiable: identifiable,
        passed: same && (n == 0 || changed > 0),
        note,
    }
}

/// Agent r, sign replies: the serving factors move by one inside the range with
/// the states kept; signs and convergence signals are recomputed and compared.
fn sign_alternative(ctx: &Ctx, r: usize) -> AlternativeCheck {
    let me = Party::Agent(r);
    let c_max = ctx.range.1;
    // true differences and factors behind each sign message, keyed by (t, k, l)
    let mut diffs: BTreeMap<(usize, usize, usize), Vec<(i128, u64)>> = BTreeMap::new();
    for e in ctx.view(Observer::Party(Party::Operator)) {
        if let Payload::EncryptedWeightedDiff { ciphertexts, .. } = &e.payload {
            if e.meta.r != r {
                continue;
            }
            let v = (0..ciphertexts.len())
                .map(|pos| {
                    let (c, wr) = ctx.composed(e, pos);
                    (wr - c.word, c.factor)
                })
                .collect();
            diffs.insert((e.meta.t, e.meta.k, e.meta.l), v);
        }
    }
    let alt = |c: u64| if c < ctx.range.1 { c + 1 } else { c - 1 };
    let mut zero_true: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let mut zero_alt: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let (mut n, mut changed, mut same) = (0, 0, true);
    for e in ctx.view(Observer::Party(me)).filter(|e| e.to == me) {
        let Payload::SignMessage { signs } = &e.payload else { continue };
        let Some(v) = diffs.get(&(e.meta.t, e.meta.k, e.meta.l)) else {
            same = false;
            continue;
        };
        let rebuilt: Vec<i8> = v.iter().map(|&(d, c)| (alt(c) as i128 * d).signum() as i8).collect();
        same &= serde_json::to_string(&rebuilt).ok() == serde_json::to_string(signs).ok();
        let zt = zero_true.entry((e.meta.t, e.meta.k)).or_insert(true);
        *zt &= v.iter().all(|&(d, c)| (c as i128 * d).unsigned_abs() <= c_max as u128);
        let za = zero_alt.entry((e.meta.t, e.meta.k)).or_insert(true);
        *za &= v.iter().all(|&(d, c)| (alt(c) as i128 * d).unsigned_abs() <= c_max as u128);
        n += signs.len();
        changed += signs.len();
    }
    let signals_same = zero_true == zero_alt;
    AlternativeCheck {
        observer: me.to_string(),
        view: "sign messages".into(),
        observations: n,
        changed: if signals_same { changed } else { 0 },
        byte_identical: same && signals_same,
        degenerate: 0,
        range_identifiable: 0,
        passed: same && signals_same,
        note: "serving factors moved by one, states kept".into(),
    }
}

fn eavesdropper(ctx: &Ctx) -> EavesdropperCheck {
    let mut moduli: BTreeMap<String, BigUint> = BTreeMap::new();
    let (mut messages, mut cts, mut decodable, mut invalid, mut secure) = (0, 0, 0, 0, 0);
    let words: BTreeSet<BigInt> = ctx.truth.sealed.values().map(|s| BigInt::from(s.word)).chain(ctx.truth.composed.values().map(|c| BigInt::from(c.word))).collect();
    let bound = BigInt::from(ctx.range.1) << ctx.codec.word_bits;
    for e in ctx.view(Observer::Eavesdropper) {
        messages += 1;
        match &e.payload {
            Payload::PublicKey { key_id, n } => {
                if let Some(n) = BigUint::parse_bytes(n.as_bytes(), 16) {
                    moduli.insert(key_id.clone(), n);
                }
            }
            Payload::PrivateKeyHandoff { .. } => secure += 1,
            Payload::SignMessage { signs } => {
                if signs.iter().any(|s| !(-1..=1).contains(s)) {
                    decodable += 1;
                }
            }
            Payload::ConvergenceSignal => {}
            p => {
                let Some(n) = moduli.get(Ctx::key_id(e)) else {
                    invalid += p.ciphertexts().len();
                    continue;
                };
                let n_sq = n * n;
                for h in p.ciphertexts() {
                    cts += 1;
                    let Ok(c) = Ciphertext::from_hex(h, "") else {
                        invalid += 1;
                        continue;
                    };
                    if c.value.is_zero() || c.value >= n_sq || !c.value.gcd(n).is_one() {
                        invalid += 1;
                    }
                    // read as a plaintext word: either directly or reduced into the ring
                    let direct = BigInt::from(c.value.clone());
                    let reduced = ring_to_signed(&c.value, n);
                    if direct.abs() <= bound || reduced.abs() <= bound || words.contains(&direct) {
                        decodable += 1;
                    }
                }
            }
        }
    }
    EavesdropperCheck { messages, ciphertexts: cts, decodable, invalid, secure_seen: secure, passed: decodable == 0 && invalid == 0 && secure == 0 && cts > 0 }
}

fn sign_correctness(ctx: &Ctx) -> SignCheck {
    let mut by_meta: BTreeMap<(usize, usize, usize, usize), &Envelope> = BTreeMap::new();
    for e in ctx.log.iter().filter(|e| e.payload.name() == "encrypted_weighted_diff") {
        by_meta.insert((e.meta.t, e.meta.k, e.meta.r, e.meta.l), e);
    }
    let (mut entries, mut mismatches) = (0, 0);
    for e in ctx.log.iter().filter(|e| e.from == Party::Operator) {
        let Payload::SignMessage { signs } = &e.payload else { continue };
        let Some(src) = by_meta.get(&(e.meta.t, e.meta.k, e.meta.r, e.meta.l)) else {
            mismatches += signs.len();
            continue;
        };
        for (pos, &s) in signs.iter().enumerate() {
            let (c, wr) = ctx.composed(src, pos);
            let d = wr - c.word;
            entries += 1;
            if d != 0 && s != d.signum() as i8 {
                mismatches += 1;
            }
        }
    }
    SignCheck { entries, mismatches }
}

fn freshness(ctx: &Ctx) -> Freshness {
    // factor vectors in send order, per (phase, serving agent, querying agent)
    let mut seqs: BTreeMap<(u8, usize, usize), Vec<Vec<u64>>> = BTreeMap::new();
    for e in ctx.log {
        let phase = match e.payload {
            Payload::EncryptedWeightedDiff { .. } => 0,
            Payload::DualWeightedDiff { .. } => 1,
            _ => continue,
        };
        let v = (0..e.payload.ciphertexts().len()).map(|pos| ctx.truth.composed[&(e.seq, pos)].factor).collect();
        seqs.entry((phase, e.meta.l, e.meta.r)).or_default().push(v);
    }
    let mut f = Freshness { scalar_pairs: 0, scalar_repeats: 0, vector_pairs: 0, vector_repeats: 0 };
    for list in seqs.values() {
        for w in list.windows(2) {
            f.vector_pairs += 1;
            f.vector_repeats += (w[0] == w[1]) as usize;
            for (a, b) in w[0].iter().zip(&w[1]) {
                f.scalar_pairs += 1;
                f.scalar_repeats += (a == b) as usize;
            }
        }
    }
    f
}

fn brackets(ctx: &Ctx, r: usize) -> SignBracket {
    let me = Party::Agent(r);
    let mut own: BTreeMap<(usize, usize, usize), &Envelope> = BTreeMap::new();
    for e in ctx.log.iter().filter(|e| e.from == me && e.meta.phase == Phase::Primal && e.payload.name() == "encrypted_boundary") {
        own.insert((e.meta.t, e.meta.k, e.meta.l), e);
    }
    let mut bounds: BTreeMap<(usize, usize, usize), (i128, i128)> = BTreeMap::new();
    for e in ctx.log.iter().filter(|e| e.to == me) {
        let Payload::SignMessage { signs } = &e.payload else { continue };
        let Some(src) = own.get(&(e.meta.t, e.meta.k, e.meta.l)) else { continue };
        for (pos, &s) in signs.iter().enumerate() {
            let x = ctx.truth.sealed[&(src.seq, pos)].word;
            let b = bounds.entry((e.meta.t, e.meta.l, pos)).or_insert((i128::MIN, i128::MAX));
            match s {
                1 => b.1 = b.1.min(x),
                -1 => b.0 = b.0.max(x),
                _ => *b = (b.0.max(x - 2), b.1.min(x + 2)),
            }
        }
    }
    let mut widths: Vec<f64> = bounds
        .values()
        .filter(|b| b.0 > i128::MIN && b.1 < i128::MAX)
        .map(|b| ctx.codec.decode_word(b.1 - b.0))
        .collect();
    widths.sort_by(f64::total_cmp);
    SignBracket {
        observer: me.to_string(),
        constants: bounds.len(),
        bracketed: widths.len(),
        median_width: widths.get(widths.len() / 2).copied().unwrap_or(f64::INFINITY),
    }
}

/// Audits a transcript against its ground truth.
pub fn privacy_audit(log: &[Envelope], truth: &GroundTruth, codec: FixedPointCodec, range: (u64, u64), n_regions: usize) -> AuditReport {
    let ctx = Ctx { log, truth, codec, range, n_regions };
    let mut alternatives = vec![operator_alternative(&ctx)];
    for r in 0..n_regions {
        alternatives.push(dual_alternative(&ctx, r));
        alternatives.push(sign_alternative(&ctx, r));
    }
    AuditReport {
        counting: counting(&ctx),
        alternatives,
        eavesdropper: eavesdropper(&ctx),
        signs: sign_correctness(&ctx),
        freshness: freshness(&ctx),
        brackets: (0..n_regions).map(|r| brackets(&ctx, r)).collect(),
    }
}

impl ProtocolExchange {
    pub fn audit(&self, range: (u64, u64)) -> AuditReport {
        privacy_audit(self.network().log(), self.truth(), self.codec(), range, self.topology().n_regions())
    }
}

