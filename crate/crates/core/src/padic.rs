//! Capped relative precision arithmetic in Q_p and its quadratic tower.
//!
//! A field is `Q_p`, optionally extended by `s` with `s^2 = u` (u a
//! non-residue, unramified) and/or by `t` with `t^2 = p` (ramified).
//! Elements are stored as `pi^val * w` where `pi` is the uniformizer
//! (`t` when ramified, `p` otherwise) and `w` is a unit written in the
//! basis `{1, s, t, s*t}` with coordinates modulo `p^M`.
//!
//! Valuations are normalized so that `v(p) = 1`; internally they are
//! counted in powers of `pi`.

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use thiserror::Error;

/// Which quadratic extension would make a non-square element a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NotSquareKind {
    Unramified,
    Ramified,
    Both,
}

impl fmt::Display for NotSquareKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NotSquareKind::Unramified => "unramified",
            NotSquareKind::Ramified => "ramified",
            NotSquareKind::Both => "unramified+ramified",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("invalid field descriptor: {0}")]
    InvalidField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionLoss(String),
    #[error("not a square; requires {0} extension")]
    NotSquare(NotSquareKind),
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("cannot parse field element: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PadicError>;

/// User-facing description of a field: prime, optional unramified
/// generator square class, optional ramified generator, working precision
/// in p-adic digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unramified: Option<i64>,
    #[serde(default)]
    pub ramified: bool,
    pub precision: u32,
}

impl FieldSpec {
    pub fn new(p: u64, precision: u32) -> Self {
        FieldSpec { p, unramified: None, ramified: false, precision }
    }

    pub fn with_unramified(mut self, u: i64) -> Self {
        self.unramified = Some(u);
        self
    }

    pub fn with_ramified(mut self) -> Self {
        self.ramified = true;
        self
    }

    /// The smallest positive non-residue modulo `p`.
    pub fn default_nonresidue(p: u64) -> i64 {
        (2..p).find(|&a| legendre(a % p, p) == -1).unwrap_or(2) as i64
    }

    /// Parse `p[,u][,ram]` as used on the command line.
    pub fn parse_short(text: &str, precision: u32) -> Result<Self> {
        let mut parts = text.split(',').map(str::trim);
        let p = parts
            .next()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| PadicError::InvalidField(format!("bad prime in {text:?}")))?;
        let mut spec = FieldSpec::new(p, precision);
        for part in parts {
            if part == "ram" {
                spec.ramified = true;
            } else if let Ok(u) = part.parse::<i64>() {
                spec.unramified = Some(u);
            } else {
                return Err(PadicError::InvalidField(format!("unknown component {part:?}")));
            }
        }
        Ok(spec)
    }
}

pub(crate) struct FieldData {
    spec: FieldSpec,
    p: u128,
    /// ramification index (1 or 2)
    e: i64,
    /// residue degree (1 or 2)
    f: u32,
    /// coordinates live modulo p^m
    m: u32,
    modulus: u128,
    /// u reduced modulo p^m (0 when there is no unramified part)
    u: u128,
    /// relative precision cap in pi-units
    cap: i64,
    pows: Vec<u128>,
}

/// Handle to an interned field. Cheap to copy; equality is identity.
#[derive(Clone, Copy)]
pub struct Field(&'static FieldData);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({:?})", self.0.spec)
    }
}

static REGISTRY: Mutex<Option<HashMap<FieldSpec, &'static FieldData>>> = Mutex::new(None);

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128;
    let mut b128 = (b % m) as u128;
    let m128 = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b128 % m128;
        }
        b128 = b128 * b128 % m128;
        e >>= 1;
    }
    b = r as u64;
    b
}

/// Legendre symbol for odd prime `p`.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod_u64(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Field> {
        let mut guard = REGISTRY.lock().expect("field registry poisoned");
        let map = guard.get_or_insert_with(HashMap::new);
        if let Some(data) = map.get(&spec) {
            return Ok(Field(data));
        }
        let data = Self::build(&spec)?;
        let leaked: &'static FieldData = Box::leak(Box::new(data));
        map.insert(spec, leaked);
        Ok(Field(leaked))
    }

    fn build(spec: &FieldSpec) -> Result<FieldData> {
        let p = spec.p;
        if p < 3 || !is_prime(p) {
            return Err(PadicError::InvalidField(format!("p = {p} must be an odd prime")));
        }
        if spec.precision == 0 {
            return Err(PadicError::InvalidField("precision must be positive".into()));
        }
        let m = spec.precision + 1;
        let mut pows = vec![1u128];
        for _ in 0..m {
            let last = *pows.last().unwrap();
            let next = last
                .checked_mul(p as u128)
                .filter(|&x| x < (1u128 << 126))
                .ok_or_else(|| {
                    PadicError::InvalidField(format!(
                        "precision {} too large for p = {p}",
                        spec.precision
                    ))
                })?;
            pows.push(next);
        }
        let modulus = pows[m as usize];
        let (f, u) = match spec.unramified {
            None => (1, 0u128),
            Some(u) => {
                let ur = u.rem_euclid(p as i64) as u64;
                if legendre(ur, p) != -1 {
                    return Err(PadicError::InvalidField(format!(
                        "u = {u} is not a quadratic non-residue mod {p}"
                    )));
                }
                (2, reduce_i128(u as i128, modulus))
            }
        };
        let e = if spec.ramified { 2 } else { 1 };
        Ok(FieldData {
            spec: spec.clone(),
            p: p as u128,
            e,
            f,
            m,
            modulus,
            u,
            cap: e * spec.precision as i64,
            pows,
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }
    pub fn p(&self) -> u64 {
        self.0.spec.p
    }
    pub fn ramification(&self) -> i64 {
        self.0.e
    }
    pub fn residue_degree(&self) -> u32 {
        self.0.f
    }
    pub fn degree(&self) -> u32 {
        self.0.f * self.0.e as u32
    }
    pub fn precision(&self) -> u32 {
        self.0.spec.precision
    }
    /// Relative precision cap counted in powers of the uniformizer.
    pub fn cap(&self) -> i64 {
        self.0.cap
    }
    pub fn is_ramified(&self) -> bool {
        self.0.e == 2
    }
    pub fn has_unramified(&self) -> bool {
        self.0.f == 2
    }
    pub fn residue_field(&self) -> ResidueField {
        ResidueField {
            p: self.p(),
            u: self.0.spec.unramified.map(|u| u.rem_euclid(self.p() as i64) as u64),
        }
    }

    /// The same tower with a different working precision.
    pub fn with_precision(&self, precision: u32) -> Result<Field> {
        let mut spec = self.spec().clone();
        spec.precision = precision;
        Field::new(spec)
    }

    /// Adjoin whatever `kind` asks for, keeping the existing generators.
    pub fn extended(&self, kind: NotSquareKind) -> Result<Field> {
        let mut spec = self.spec().clone();
        if matches!(kind, NotSquareKind::Unramified | NotSquareKind::Both) && spec.unramified.is_none() {
            spec.unramified = Some(FieldSpec::default_nonresidue(spec.p));
        }
        if matches!(kind, NotSquareKind::Ramified | NotSquareKind::Both) {
            spec.ramified = true;
        }
        Field::new(spec)
    }

    /// Convert a valuation counted in uniformizer powers into p-units.
    pub fn to_val(&self, pi_units: i64) -> Rational64 {
        Rational64::new(pi_units, self.0.e)
    }

    /// Convert a rational valuation into uniformizer units, if it lies in
    /// the value group.
    pub fn to_pi_units(&self, v: Rational64) -> Option<i64> {
        let scaled = v * Rational64::from_integer(self.0.e);
        scaled.is_integer().then(|| scaled.to_integer())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { field: *self, kind: Kind::Zero { abs: None } }
    }
    pub fn one(&self) -> FieldElement {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> FieldElement {
        self.from_i128(n as i128)
    }

    pub fn from_i128(&self, n: i128) -> FieldElement {
        if n == 0 {
            return self.zero();
        }
        let p = self.0.p as i128;
        let mut k = 0i64;
        let mut n = n;
        while n % p == 0 {
            n /= p;
            k += 1;
        }
        let c0 = reduce_i128(n, self.0.modulus);
        FieldElement {
            field: *self,
            kind: Kind::Unit { val: k * self.0.e, prec: self.0.cap, c: [c0, 0, 0, 0] },
        }
    }

    pub fn from_ratio(&self, num: i128, den: i128) -> Result<FieldElement> {
        let n = self.from_i128(num);
        let d = self.from_i128(den);
        n.checked_div(&d)
    }

    /// The unramified generator `s` (with `s^2 = u`).
    pub fn gen_s(&self) -> Result<FieldElement> {
        if self.0.f != 2 {
            return Err(PadicError::InvalidField("field has no unramified generator".into()));
        }
        Ok(FieldElement { field: *self, kind: Kind::Unit { val: 0, prec: self.0.cap, c: [0, 1, 0, 0] } })
    }

    /// The ramified generator `t` (with `t^2 = p`).
    pub fn gen_t(&self) -> Result<FieldElement> {
        if self.0.e != 2 {
            return Err(PadicError::InvalidField("field has no ramified generator".into()));
        }
        Ok(FieldElement { field: *self, kind: Kind::Unit { val: 1, prec: self.0.cap, c: [1, 0, 0, 0] } })
    }

    /// The uniformizer raised to `k` (counted in uniformizer units).
    pub fn pi_pow(&self, k: i64) -> FieldElement {
        FieldElement { field: *self, kind: Kind::Unit { val: k, prec: self.0.cap, c: [1, 0, 0, 0] } }
    }

    /// Teichmuller-free lift of a residue: the digit `a + b*s` itself.
    pub fn lift_residue(&self, r: Residue) -> FieldElement {
        if r.a == 0 && r.b == 0 {
            return self.zero();
        }
        FieldElement {
            field: *self,
            kind: Kind::Unit { val: 0, prec: self.0.cap, c: [r.a as u128, r.b as u128, 0, 0] },
        }
    }

    /// Random unit whose coordinates are uniform modulo `p^M`.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let mut c = [0u128; 4];
            for (i, ci) in c.iter_mut().enumerate() {
                if self.coord_used(i) {
                    *ci = rng.gen_range(0..self.0.modulus);
                }
            }
            let x = FieldElement { field: *self, kind: Kind::Unit { val: 0, prec: self.0.cap, c } };
            if !x.residue().is_zero() {
                return x;
            }
        }
    }

    /// Random element of exact valuation `v` (p-units, must lie in the value group).
    pub fn random_with_valuation<R: Rng + ?Sized>(&self, rng: &mut R, v: Rational64) -> FieldElement {
        let k = self.to_pi_units(v).expect("valuation outside value group");
        self.random_unit(rng).shift(k)
    }

    fn coord_used(&self, i: usize) -> bool {
        match i {
            0 => true,
            1 => self.0.f == 2,
            2 => self.0.e == 2,
            _ => self.0.f == 2 && self.0.e == 2,
        }
    }

    pub fn parse(&self, text: &str) -> Result<FieldElement> {
        crate::padic_parse::parse_element(*self, text)
    }
}

fn reduce_i128(n: i128, m: u128) -> u128 {
    if n >= 0 {
        (n as u128) % m
    } else {
        let r = ((-n) as u128) % m;
        if r == 0 {
            0
        } else {
            m - r
        }
    }
}

// ---------------------------------------------------------------------------
// modular coordinate arithmetic

#[inline]
fn addm(a: u128, b: u128, m: u128) -> u128 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
fn subm(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        a + (m - b)
    }
}

#[inline]
fn mulm(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        a * b % m
    } else {
        mulm_wide(a, b, m)
    }
}

fn mulm_wide(a: u128, b: u128, m: u128) -> u128 {
    const MASK: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & MASK);
    let (b1, b0) = (b >> 64, b & MASK);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let (mid, mid_carry) = p01.overflowing_add(p10);
    let (lo, c1) = p00.overflowing_add(mid << 64);
    let hi = p11 + (mid >> 64) + ((mid_carry as u128) << 64) + c1 as u128;
    let mut r = hi % m;
    for i in (0..128).rev() {
        r = (r << 1) | ((lo >> i) & 1);
        if r >= m {
            r -= m;
        }
    }
    r
}

fn inv_mod(a: u128, m: u128) -> Option<u128> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        let qs = mulm(reduce_i128(q, m), reduce_i128(s, m), m);
        (old_s, s) = (s, subm(reduce_i128(old_s, m), qs, m) as i128);
    }
    (old_r == 1).then(|| reduce_i128(old_s, m))
}

/// `v_p` of an integer representative, capped at `cap`.
#[inline]
fn vp(mut x: u128, p: u128, cap: i64) -> i64 {
    if x == 0 {
        return cap;
    }
    let mut k = 0;
    while x % p == 0 && k < cap {
        x /= p;
        k += 1;
    }
    k
}

type Coords = [u128; 4];

impl FieldData {
    #[inline]
    fn mul_unr(&self, a0: u128, a1: u128, b0: u128, b1: u128) -> (u128, u128) {
        let m = self.modulus;
        if self.f == 1 {
            return (mulm(a0, b0, m), 0);
        }
        let r0 = addm(mulm(a0, b0, m), mulm(self.u, mulm(a1, b1, m), m), m);
        let r1 = addm(mulm(a0, b1, m), mulm(a1, b0, m), m);
        (r0, r1)
    }

    #[inline]
    fn mul_coords(&self, x: &Coords, y: &Coords) -> Coords {
        let m = self.modulus;
        let (ac0, ac1) = self.mul_unr(x[0], x[1], y[0], y[1]);
        if self.e == 1 {
            return [ac0, ac1, 0, 0];
        }
        let (bd0, bd1) = self.mul_unr(x[2], x[3], y[2], y[3]);
        let (ad0, ad1) = self.mul_unr(x[0], x[1], y[2], y[3]);
        let (bc0, bc1) = self.mul_unr(x[2], x[3], y[0], y[1]);
        [
            addm(ac0, mulm(self.p, bd0, m), m),
            addm(ac1, mulm(self.p, bd1, m), m),
            addm(ad0, bc0, m),
            addm(ad1, bc1, m),
        ]
    }

    #[inline]
    fn add_coords(&self, x: &Coords, y: &Coords) -> Coords {
        let m = self.modulus;
        [addm(x[0], y[0], m), addm(x[1], y[1], m), addm(x[2], y[2], m), addm(x[3], y[3], m)]
    }

    #[inline]
    fn neg_coords(&self, x: &Coords) -> Coords {
        let m = self.modulus;
        [subm(0, x[0], m), subm(0, x[1], m), subm(0, x[2], m), subm(0, x[3], m)]
    }

    fn scale_p(&self, x: &Coords, k: u32) -> Coords {
        if k >= self.m {
            return [0; 4];
        }
        let f = self.pows[k as usize];
        let m = self.modulus;
        [mulm(x[0], f, m), mulm(x[1], f, m), mulm(x[2], f, m), mulm(x[3], f, m)]
    }

    /// Multiply by pi^k, k >= 0.
    fn shift_coords(&self, x: &Coords, k: i64) -> Coords {
        if self.e == 1 {
            return self.scale_p(x, k.min(u32::MAX as i64) as u32);
        }
        let q = (k / 2).min(u32::MAX as i64) as u32;
        let y = self.scale_p(x, q);
        if k % 2 == 1 {
            // t * (A + B t) = p B + A t
            let pb = self.scale_p(&[y[2], y[3], 0, 0], 1);
            [pb[0], pb[1], y[0], y[1]]
        } else {
            y
        }
    }

    /// Divide by pi^k where the representative is divisible.
    fn unshift_coords(&self, x: &Coords, k: i64) -> Coords {
        let mut y = *x;
        let mut k = k;
        if self.e == 2 && k % 2 == 1 {
            // (A + B t) / t = B + (A/p) t
            y = [y[2], y[3], y[0] / self.p, y[1] / self.p];
            k -= 1;
        }
        let q = (k / self.e) as usize;
        if q > 0 {
            let d = self.pows[q.min(self.pows.len() - 1)];
            y = [y[0] / d, y[1] / d, y[2] / d, y[3] / d];
        }
        y
    }

    /// Valuation of a representative in pi-units, capped at `cap`.
    fn val_coords(&self, x: &Coords, cap: i64) -> i64 {
        let pc = cap / self.e + 1;
        let va = vp(x[0], self.p, pc).min(vp(x[1], self.p, pc));
        if self.e == 1 {
            return va.min(cap);
        }
        let vb = vp(x[2], self.p, pc).min(vp(x[3], self.p, pc));
        (2 * va).min(2 * vb + 1).min(cap)
    }

    fn inv_unit(&self, x: &Coords) -> Option<Coords> {
        let m = self.modulus;
        // (A + B t)^{-1} = (A - B t) / (A^2 - p B^2)
        let (a0, a1, b0, b1) = (x[0], x[1], x[2], x[3]);
        let (aa0, aa1) = self.mul_unr(a0, a1, a0, a1);
        let (bb0, bb1) = self.mul_unr(b0, b1, b0, b1);
        let n0 = subm(aa0, mulm(self.p, bb0, m), m);
        let n1 = subm(aa1, mulm(self.p, bb1, m), m);
        // (n0 + n1 s)^{-1} = (n0 - n1 s) / (n0^2 - u n1^2)
        let norm = subm(mulm(n0, n0, m), mulm(self.u, mulm(n1, n1, m), m), m);
        let ninv = inv_mod(norm, m)?;
        let i0 = mulm(n0, ninv, m);
        let i1 = mulm(subm(0, n1, m), ninv, m);
        let (r0, r1) = self.mul_unr(a0, a1, i0, i1);
        let (r2, r3) = self.mul_unr(subm(0, b0, m), subm(0, b1, m), i0, i1);
        Some([r0, r1, r2, r3])
    }

    /// Reduce modulo pi^k, keeping representatives in canonical digit form.
    fn truncate_coords(&self, x: &Coords, k: i64) -> Coords {
        if k <= 0 {
            return [0; 4];
        }
        let (ka, kb) = if self.e == 1 { (k, 0) } else { ((k + 1) / 2, k / 2) };
        let ma = self.pows[(ka as usize).min(self.pows.len() - 1)];
        let mb = self.pows[(kb as usize).min(self.pows.len() - 1)];
        [x[0] % ma, x[1] % ma, x[2] % mb, x[3] % mb]
    }
}

// ---------------------------------------------------------------------------
// residue fields

/// The residue field `F_p` or `F_{p^2} = F_p(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueField {
    pub p: u64,
    /// square class of `s` (None for `F_p`)
    pub u: Option<u64>,
}

/// Residue `a + b*s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Residue {
    pub a: u64,
    pub b: u64,
}

impl Residue {
    pub const ZERO: Residue = Residue { a: 0, b: 0 };
    pub const ONE: Residue = Residue { a: 1, b: 0 };
    pub fn new(a: u64, b: u64) -> Self {
        Residue { a, b }
    }
    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, 1) => write!(f, "s"),
            (0, b) => write!(f, "{b}*s"),
            (a, 1) => write!(f, "{a}+s"),
            (a, b) => write!(f, "{a}+{b}*s"),
        }
    }
}

impl ResidueField {
    pub fn size(&self) -> u64 {
        if self.u.is_some() {
            self.p * self.p
        } else {
            self.p
        }
    }
    pub fn elements(&self) -> Vec<Residue> {
        let bmax = if self.u.is_some() { self.p } else { 1 };
        let mut out = Vec::new();
        for b in 0..bmax {
            for a in 0..self.p {
                out.push(Residue { a, b });
            }
        }
        out
    }
    pub fn from_i64(&self, n: i64) -> Residue {
        Residue { a: n.rem_euclid(self.p as i64) as u64, b: 0 }
    }
    pub fn add(&self, x: Residue, y: Residue) -> Residue {
        Residue { a: (x.a + y.a) % self.p, b: (x.b + y.b) % self.p }
    }
    pub fn neg(&self, x: Residue) -> Residue {
        Residue { a: (self.p - x.a) % self.p, b: (self.p - x.b) % self.p }
    }
    pub fn sub(&self, x: Residue, y: Residue) -> Residue {
        self.add(x, self.neg(y))
    }
    pub fn mul(&self, x: Residue, y: Residue) -> Residue {
        let p = self.p as u128;
        let u = self.u.unwrap_or(0) as u128;
        let (xa, xb, ya, yb) = (x.a as u128, x.b as u128, y.a as u128, y.b as u128);
        Residue {
            a: ((xa * ya + u * (xb * yb % p)) % p) as u64,
            b: ((xa * yb + xb * ya) % p) as u64,
        }
    }
    pub fn pow(&self, x: Residue, mut e: u64) -> Residue {
        let mut r = Residue::ONE;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }
    pub fn inv(&self, x: Residue) -> Option<Residue> {
        if x.is_zero() {
            return None;
        }
        Some(self.pow(x, self.size() - 2))
    }
    pub fn div(&self, x: Residue, y: Residue) -> Option<Residue> {
        self.inv(y).map(|yi| self.mul(x, yi))
    }
    pub fn is_square(&self, x: Residue) -> bool {
        x.is_zero() || self.pow(x, (self.size() - 1) / 2) == Residue::ONE
    }
    /// Square root in `F_p` by Tonelli-Shanks.
    fn sqrt_fp(&self, a: u64) -> Option<u64> {
        let p = self.p;
        if a == 0 {
            return Some(0);
        }
        if legendre(a, p) != 1 {
            return None;
        }
        let mut q = p - 1;
        let mut s = 0;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let z = (2..p).find(|&z| legendre(z, p) == -1)?;
        let mut m = s;
        let mut c = pow_mod_u64(z, q, p);
        let mut t = pow_mod_u64(a, q, p);
        let mut r = pow_mod_u64(a, (q + 1) / 2, p);
        let mulp = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
        while t != 1 {
            let mut i = 0;
            let mut tt = t;
            while tt != 1 {
                tt = mulp(tt, tt);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = mulp(b, b);
            }
            m = i;
            c = mulp(b, b);
            t = mulp(t, c);
            r = mulp(r, b);
        }
        Some(r.min(p - r))
    }
    pub fn sqrt(&self, x: Residue) -> Option<Residue> {
        let p = self.p;
        if x.b == 0 {
            if let Some(r) = self.sqrt_fp(x.a) {
                return Some(Residue { a: r, b: 0 });
            }
            let u = self.u?;
            // x = c^2 u  ->  sqrt = c s
            let ui = pow_mod_u64(u, p - 2, p);
            let c = self.sqrt_fp(((x.a as u128 * ui as u128) % p as u128) as u64)?;
            return Some(Residue { a: 0, b: c });
        }
        let u = self.u?;
        let pm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
        let norm = (pm(x.a, x.a) + p - pm(u, pm(x.b, x.b))) % p;
        let n = self.sqrt_fp(norm)?;
        let half = pow_mod_u64(2, p - 2, p);
        for cand in [n, (p - n) % p] {
            let y2 = pm((x.a + cand) % p, half);
            if let Some(y) = self.sqrt_fp(y2) {
                if y == 0 {
                    continue;
                }
                let z = pm(x.b, pow_mod_u64(pm(2, y), p - 2, p));
                let r = Residue { a: y, b: z };
                if self.mul(r, r) == x {
                    return Some(r);
                }
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// elements

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// Zero known to absolute precision `abs` (pi-units); `None` is exact.
    Zero { abs: Option<i64> },
    /// `pi^val * w`, `w` a unit known modulo `pi^prec`.
    Unit { val: i64, prec: i64, c: Coords },
}

/// Element of a p-adic field with capped relative precision.
#[derive(Clone, Copy)]
pub struct FieldElement {
    field: Field,
    kind: Kind,
}

impl FieldElement {
    pub fn field(&self) -> Field {
        self.field
    }

    fn data(&self) -> &'static FieldData {
        self.field.0
    }

    /// True for an exact zero or a zero known only up to some precision.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero { abs: None })
    }

    /// Valuation in p-units; `None` for zero.
    pub fn valuation(&self) -> Option<Rational64> {
        self.val_pi().map(|v| self.field.to_val(v))
    }

    /// Valuation counted in uniformizer powers; `None` for zero.
    pub fn val_pi(&self) -> Option<i64> {
        match self.kind {
            Kind::Unit { val, .. } => Some(val),
            Kind::Zero { .. } => None,
        }
    }

    /// Lower bound for the valuation in uniformizer powers (zero gives its
    /// absolute precision, or `i64::MAX` when exact).
    pub fn val_lower_pi(&self) -> i64 {
        match self.kind {
            Kind::Unit { val, .. } => val,
            Kind::Zero { abs } => abs.unwrap_or(i64::MAX),
        }
    }

    /// Lower bound for the valuation in p-units (`None` for exact zero).
    pub fn val_lower(&self) -> Option<Rational64> {
        match self.kind {
            Kind::Zero { abs: None } => None,
            _ => Some(self.field.to_val(self.val_lower_pi())),
        }
    }

    /// Relative precision in uniformizer powers (0 for zero).
    pub fn rel_prec_pi(&self) -> i64 {
        match self.kind {
            Kind::Unit { prec, .. } => prec,
            Kind::Zero { .. } => 0,
        }
    }

    /// Relative precision in p-units.
    pub fn rel_precision(&self) -> Rational64 {
        self.field.to_val(self.rel_prec_pi())
    }

    /// Absolute precision in uniformizer powers (`None` when exact zero).
    pub fn abs_prec_pi(&self) -> Option<i64> {
        match self.kind {
            Kind::Unit { val, prec, .. } => Some(val + prec),
            Kind::Zero { abs } => abs,
        }
    }

    /// Absolute precision in p-units.
    pub fn abs_precision(&self) -> Option<Rational64> {
        self.abs_prec_pi().map(|a| self.field.to_val(a))
    }

    /// True when the element carries the full working precision.
    pub fn is_full_precision(&self) -> bool {
        match self.kind {
            Kind::Unit { prec, .. } => prec >= self.data().cap,
            Kind::Zero { abs } => abs.is_none(),
        }
    }

    /// Residue of the unit part (zero for zero).
    pub fn residue(&self) -> Residue {
        match self.kind {
            Kind::Unit { c, .. } => {
                let p = self.data().p;
                Residue { a: (c[0] % p) as u64, b: (c[1] % p) as u64 }
            }
            Kind::Zero { .. } => Residue::ZERO,
        }
    }

    /// Residue of the element itself: requires valuation >= 0.
    pub fn reduce(&self) -> Option<Residue> {
        match self.kind {
            Kind::Unit { val, .. } if val == 0 => Some(self.residue()),
            Kind::Unit { val, .. } if val > 0 => Some(Residue::ZERO),
            Kind::Zero { abs } if abs.map_or(true, |a| a >= 1) => Some(Residue::ZERO),
            _ => None,
        }
    }

    fn unit(field: Field, val: i64, prec: i64, c: Coords) -> FieldElement {
        let cap = field.0.cap;
        let prec = prec.min(cap);
        if prec <= 0 {
            return FieldElement { field, kind: Kind::Zero { abs: Some(val) } };
        }
        FieldElement { field, kind: Kind::Unit { val, prec, c } }
    }

    /// Build from an unnormalized representative `pi^base * x`, where x is
    /// known modulo `pi^abs_rel`.
    fn normalize(field: Field, base: i64, x: Coords, abs_rel: i64) -> FieldElement {
        let d = field.0;
        let k = d.val_coords(&x, abs_rel.max(0));
        if k >= abs_rel {
            return FieldElement { field, kind: Kind::Zero { abs: Some(base + abs_rel.max(0)) } };
        }
        let y = d.unshift_coords(&x, k);
        FieldElement::unit(field, base + k, abs_rel - k, y)
    }

    /// Multiply by pi^k (any sign); exact.
    pub fn shift(&self, k: i64) -> FieldElement {
        let mut r = *self;
        match &mut r.kind {
            Kind::Unit { val, .. } => *val += k,
            Kind::Zero { abs: Some(a) } => *a += k,
            Kind::Zero { abs: None } => {}
        }
        r
    }

    /// Limit the absolute precision to `abs` (pi-units).
    pub fn with_abs_prec_pi(&self, abs: i64) -> FieldElement {
        match self.kind {
            Kind::Unit { val, prec, c } => FieldElement::unit(self.field, val, prec.min(abs - val), c),
            Kind::Zero { abs: a } => FieldElement {
                field: self.field,
                kind: Kind::Zero { abs: Some(a.map_or(abs, |a| a.min(abs))) },
            },
        }
    }

    /// The known digits taken to full working precision, unknown digits
    /// read as zero. An inexact zero becomes exact.
    pub fn padded(&self) -> FieldElement {
        match self.kind {
            Kind::Unit { val, prec, c } => {
                let d = self.data();
                FieldElement::unit(self.field, val, d.cap, d.truncate_coords(&c, prec))
            }
            Kind::Zero { .. } => self.field.zero(),
        }
    }

    /// Limit the relative precision to `rel` (pi-units).
    pub fn with_rel_prec_pi(&self, rel: i64) -> FieldElement {
        match self.kind {
            Kind::Unit { val, prec, c } => FieldElement::unit(self.field, val, prec.min(rel), c),
            _ => *self,
        }
    }

    fn check(&self, other: &FieldElement) {
        assert!(self.field == other.field, "field mismatch: {:?} vs {:?}", self.field, other.field);
    }

    pub fn neg(&self) -> FieldElement {
        match self.kind {
            Kind::Unit { val, prec, c } => {
                FieldElement { field: self.field, kind: Kind::Unit { val, prec, c: self.data().neg_coords(&c) } }
            }
            _ => *self,
        }
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        self.check(other);
        match (self.kind, other.kind) {
            (Kind::Zero { abs: None }, _) => *other,
            (_, Kind::Zero { abs: None }) => *self,
            (Kind::Zero { abs: Some(a) }, _) => other.with_abs_prec_pi(a),
            (_, Kind::Zero { abs: Some(a) }) => self.with_abs_prec_pi(a),
            (Kind::Unit { val: v1, prec: r1, c: c1 }, Kind::Unit { val: v2, prec: r2, c: c2 }) => {
                let (v1, r1, c1, v2, r2, c2) =
                    if v1 <= v2 { (v1, r1, c1, v2, r2, c2) } else { (v2, r2, c2, v1, r1, c1) };
                let abs = (v1 + r1).min(v2 + r2);
                let d = self.data();
                let shifted = d.shift_coords(&c2, v2 - v1);
                let x = d.add_coords(&c1, &shifted);
                FieldElement::normalize(self.field, v1, x, abs - v1)
            }
        }
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        self.check(other);
        match (self.kind, other.kind) {
            (Kind::Zero { abs: None }, _) | (_, Kind::Zero { abs: None }) => self.field.zero(),
            (Kind::Zero { abs: Some(a) }, k) | (k, Kind::Zero { abs: Some(a) }) => {
                let shift = match k {
                    Kind::Unit { val, .. } => val,
                    Kind::Zero { abs } => abs.unwrap_or(0),
                };
                FieldElement { field: self.field, kind: Kind::Zero { abs: Some(a + shift) } }
            }
            (Kind::Unit { val: v1, prec: r1, c: c1 }, Kind::Unit { val: v2, prec: r2, c: c2 }) => {
                let c = self.data().mul_coords(&c1, &c2);
                FieldElement { field: self.field, kind: Kind::Unit { val: v1 + v2, prec: r1.min(r2), c } }
            }
        }
    }

    pub fn inv(&self) -> Result<FieldElement> {
        match self.kind {
            Kind::Zero { abs: None } => Err(PadicError::DivisionByZero),
            Kind::Zero { .. } => Err(PadicError::PrecisionLoss("inverting an inexact zero".into())),
            Kind::Unit { val, prec, c } => {
                let ci = self
                    .data()
                    .inv_unit(&c)
                    .ok_or_else(|| PadicError::PrecisionLoss("unit not invertible".into()))?;
                Ok(FieldElement { field: self.field, kind: Kind::Unit { val: -val, prec, c: ci } })
            }
        }
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn square(&self) -> FieldElement {
        self.mul(self)
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut r = self.field.one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Whether the element is a square, with the extension needed when not.
    pub fn square_class(&self) -> Result<Option<NotSquareKind>> {
        match self.kind {
            Kind::Zero { abs: None } => Ok(None),
            Kind::Zero { .. } => Err(PadicError::PrecisionLoss("square test of inexact zero".into())),
            Kind::Unit { val, .. } => {
                let rf = self.field.residue_field();
                let odd = val % 2 != 0;
                let res_sq = rf.is_square(self.residue());
                Ok(match (odd, res_sq) {
                    (false, true) => None,
                    (true, true) => Some(NotSquareKind::Ramified),
                    (false, false) => Some(NotSquareKind::Unramified),
                    (true, false) => {
                        // in Q_p(t), t*w with w a non-square unit: sqrt needs both
                        Some(NotSquareKind::Both)
                    }
                })
            }
        }
    }

    pub fn is_square(&self) -> Result<bool> {
        Ok(self.square_class()?.is_none())
    }

    /// Square root by Hensel lifting. The root returned has residue of its
    /// unit part in canonical (smaller) form; the other root is its negative.
    pub fn sqrt(&self) -> Result<FieldElement> {
        if let Some(kind) = self.square_class()? {
            return Err(PadicError::NotSquare(kind));
        }
        let (val, prec) = match self.kind {
            Kind::Zero { .. } => return Ok(*self),
            Kind::Unit { val, prec, .. } => (val, prec),
        };
        let unit = self.shift(-val);
        let rf = self.field.residue_field();
        let r0 = rf.sqrt(unit.residue()).expect("residue square root");
        let two_inv = self.field.from_i64(2).inv()?;
        let mut y = self.field.lift_residue(r0);
        let mut good = 1i64;
        while good < prec {
            // Newton: y <- (y + w/y)/2 doubles the number of correct digits
            y = y.add(&unit.checked_div(&y)?).mul(&two_inv);
            good *= 2;
        }
        y = y.add(&unit.checked_div(&y)?).mul(&two_inv);
        Ok(y.with_rel_prec_pi(prec).shift(val / 2))
    }

    /// Drop all digits of (absolute) valuation >= `abs` (pi-units).
    pub fn truncate_below(&self, abs: i64) -> FieldElement {
        match self.kind {
            Kind::Zero { .. } => self.field.zero(),
            Kind::Unit { val, c, .. } => {
                if val >= abs {
                    return self.field.zero();
                }
                let k = abs - val;
                let t = self.data().truncate_coords(&c, k);
                FieldElement::unit(self.field, val, self.data().cap, t)
            }
        }
    }

    /// Digits of the unit part: entry `k` is the coefficient of `pi^k`,
    /// written as a residue `a + b*s`.
    pub fn unit_digits(&self) -> Vec<Residue> {
        match self.kind {
            Kind::Zero { .. } => vec![],
            Kind::Unit { prec, c, .. } => {
                let d = self.data();
                let p = d.p;
                let mut a = [c[0], c[1]];
                let mut b = [c[2], c[3]];
                let mut out = Vec::with_capacity(prec as usize);
                for k in 0..prec {
                    let src = if d.e == 1 || k % 2 == 0 { &mut a } else { &mut b };
                    out.push(Residue { a: (src[0] % p) as u64, b: (src[1] % p) as u64 });
                    src[0] /= p;
                    src[1] /= p;
                }
                out
            }
        }
    }

    /// Agreement to absolute valuation `v` (p-units): `v(self - other) >= v`.
    pub fn eq_abs(&self, other: &FieldElement, v: Rational64) -> bool {
        let d = self.sub(other);
        match d.val_lower() {
            None => true,
            Some(w) => w >= v,
        }
    }

    /// Relative agreement: `v(self/other - 1) >= rel` (p-units).
    pub fn eq_rel(&self, other: &FieldElement, rel: Rational64) -> bool {
        match (self.valuation(), other.valuation()) {
            (Some(a), Some(b)) if a == b => self.eq_abs(other, a + rel),
            _ => false,
        }
    }

    /// Valuation of `self/other - 1` (p-units), `None` if exact equality.
    pub fn rel_distance(&self, other: &FieldElement) -> Result<Option<Rational64>> {
        let q = self.checked_div(other)?;
        Ok(q.sub(&self.field.one()).val_lower())
    }

    /// Whether two elements are identical including precision metadata.
    pub fn identical(&self, other: &FieldElement) -> bool {
        if self.field != other.field {
            return false;
        }
        match (self.kind, other.kind) {
            (Kind::Unit { val: v1, prec: r1, c: c1 }, Kind::Unit { val: v2, prec: r2, c: c2 }) => {
                let d = self.data();
                v1 == v2 && r1 == r2 && d.truncate_coords(&c1, r1) == d.truncate_coords(&c2, r2)
            }
            (a, b) => a == b,
        }
    }

    /// Key that identifies the element modulo `pi^abs` (for hashing).
    pub fn key_mod(&self, abs: i64) -> (i64, [u128; 4]) {
        match self.kind {
            Kind::Unit { val, c, .. } if val < abs => (val, self.data().truncate_coords(&c, abs - val)),
            _ => (i64::MAX, [0; 4]),
        }
    }

    /// Change the working field (only the precision may differ, or the
    /// target may add generators).
    pub fn lift_to(&self, target: Field) -> Result<FieldElement> {
        let src = self.data();
        let dst = target.0;
        if src.p != dst.p {
            return Err(PadicError::FieldMismatch);
        }
        if src.f == 2 && (dst.f != 2 || src.spec.unramified != dst.spec.unramified) {
            return Err(PadicError::FieldMismatch);
        }
        if src.e == 2 && dst.e != 2 {
            return Err(PadicError::FieldMismatch);
        }
        let scale = dst.e / src.e;
        match self.kind {
            Kind::Zero { abs } => Ok(FieldElement { field: target, kind: Kind::Zero { abs: abs.map(|a| a * scale) } }),
            Kind::Unit { val, prec, c } => {
                let m = dst.modulus;
                let c = [c[0] % m, c[1] % m, c[2] % m, c[3] % m];
                Ok(FieldElement::unit(target, val * scale, prec * scale, c))
            }
        }
    }
}

impl PartialEq for FieldElement {
    /// Equality up to the joint precision of both operands.
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.sub(other).is_zero()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                self.$f(rhs)
            }
        }
        impl std::ops::$tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                (&self).$f(&rhs)
            }
        }
        impl std::ops::$tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                (&self).$f(rhs)
            }
        }
    };
}
binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

fn fmt_val(v: Rational64) -> String {
    if v.is_integer() {
        v.to_integer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn fmt_digit(r: Residue, with_t: bool) -> Option<String> {
    if r.is_zero() {
        return None;
    }
    let base = match (r.a, r.b) {
        (a, 0) => a.to_string(),
        (0, 1) => "s".into(),
        (0, b) => format!("{b}*s"),
        (a, 1) => format!("({a}+s)"),
        (a, b) => format!("({a}+{b}*s)"),
    };
    if !with_t {
        return Some(base);
    }
    Some(if base == "1" { "t".into() } else { format!("{base}*t") })
}

impl fmt::Display for FieldElement {
    /// `p^(v) * (d0 + d1*p + ...) + O(p^(w))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Zero { abs: None } => write!(f, "0"),
            Kind::Zero { abs: Some(a) } => write!(f, "O(p^({}))", fmt_val(self.field.to_val(a))),
            Kind::Unit { val, prec, .. } => {
                let e = self.data().e;
                let digits = self.unit_digits();
                let mut terms = Vec::new();
                for (k, d) in digits.iter().enumerate() {
                    let k = k as i64;
                    let with_t = e == 2 && k % 2 == 1;
                    if let Some(ds) = fmt_digit(*d, with_t) {
                        let j = k / e;
                        terms.push(match j {
                            0 => ds,
                            1 => format!("{ds}*p"),
                            _ => format!("{ds}*p^{j}"),
                        });
                    }
                }
                write!(
                    f,
                    "p^({}) * ({}) + O(p^({}))",
                    fmt_val(self.field.to_val(val)),
                    terms.join(" + "),
                    fmt_val(self.field.to_val(val + prec))
                )
            }
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q5(n: u32) -> Field {
        Field::new(FieldSpec::new(5, n)).unwrap()
    }

    /// Base-p digits of a rational with denominator prime to p, by repeated
    /// division; independent of the coordinate arithmetic.
    fn digits_oracle(num: i64, den: i64, p: i64, count: usize) -> Vec<u64> {
        let mut out = vec![];
        let (mut n, d) = (num, den);
        for _ in 0..count {
            let dinv = (1..p).find(|x| (x * d).rem_euclid(p) == 1).unwrap();
            let digit = (n * dinv).rem_euclid(p);
            out.push(digit as u64);
            n = (n - digit * d) / p;
        }
        out
    }

    #[test]
    fn digits_of_39_over_5() {
        let f = q5(6);
        let x = f.from_i64(39);
        let got: Vec<u64> = x.unit_digits().iter().map(|r| r.a).collect();
        assert_eq!(got, digits_oracle(39, 1, 5, 6));
        assert_eq!(got, vec![4, 2, 1, 0, 0, 0]);
        let y = f.from_ratio(-1, 3).unwrap();
        let got: Vec<u64> = y.unit_digits().iter().map(|r| r.a).collect();
        assert_eq!(got, digits_oracle(-1, 3, 5, 6));
    }

    #[test]
    fn cancellation_flags_precision() {
        let f = q5(10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = f.random_unit(&mut rng);
        let x = f.one().add(&u.shift(10)).sub(&f.one());
        assert!(x.is_zero());
        assert_eq!(x.abs_precision(), Some(Rational64::from_integer(10)));
        let y = f.one().add(&u.shift(4)).sub(&f.one());
        assert_eq!(y.valuation(), Some(Rational64::from_integer(4)));
        assert_eq!(y.rel_precision(), Rational64::from_integer(6));
    }

    #[test]
    fn square_roots_and_diagnosis() {
        let f = q5(12);
        let x = f.from_i64(39);
        let r = x.sqrt().unwrap();
        assert_eq!(r.square(), x);
        let f7 = Field::new(FieldSpec::new(7, 10)).unwrap();
        let two = f7.from_i64(2);
        let r = two.sqrt().unwrap();
        // 3^2 = 9 = 2 mod 7
        assert!(r.residue().a == 3 || r.residue().a == 4);
        let f3 = Field::new(FieldSpec::new(3, 10)).unwrap();
        assert_eq!(f3.from_i64(3).sqrt().unwrap_err(), PadicError::NotSquare(NotSquareKind::Ramified));
        assert_eq!(f3.from_i64(2).sqrt().unwrap_err(), PadicError::NotSquare(NotSquareKind::Unramified));
        let f3r = f3.extended(NotSquareKind::Ramified).unwrap();
        let r3 = f3r.from_i64(3).sqrt().unwrap();
        assert_eq!(r3.valuation(), Some(Rational64::new(1, 2)));
        assert_eq!(r3.square(), f3r.from_i64(3));
    }

    #[test]
    fn fifteen_is_nonresidue_mod_37() {
        // Euler criterion computed directly
        let mut acc = 1u64;
        for _ in 0..18 {
            acc = acc * 15 % 37;
        }
        assert_eq!(acc, 36);
        assert!(Field::new(FieldSpec::new(37, 20).with_unramified(15)).is_ok());
        assert!(Field::new(FieldSpec::new(37, 20).with_unramified(4)).is_err());
    }

    #[test]
    fn wide_modulus_products() {
        let f = Field::new(FieldSpec::new(37, 20).with_unramified(15)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = f.random_unit(&mut rng);
            let b = f.random_unit(&mut rng);
            let q = a.mul(&b).checked_div(&b).unwrap();
            assert_eq!(q, a);
        }
    }

    #[test]
    fn display_format() {
        let f = q5(4);
        assert_eq!(f.from_i64(39).to_string(), "p^(0) * (4 + 2*p + 1*p^2) + O(p^(4))");
        assert_eq!(f.from_i64(25).to_string(), "p^(2) * (1) + O(p^(6))");
        let g = Field::new(FieldSpec::new(3, 3).with_ramified()).unwrap();
        assert_eq!(g.gen_t().unwrap().to_string(), "p^(1/2) * (1) + O(p^(7/2))");
    }

    #[test]
    fn residue_sqrt_f9() {
        let rf = ResidueField { p: 3, u: Some(2) };
        for x in rf.elements() {
            let sq = rf.mul(x, x);
            let r = rf.sqrt(sq).unwrap();
            assert_eq!(rf.mul(r, r), sq);
        }
    }

    fn any_field() -> impl Strategy<Value = Field> {
        prop_oneof![
            Just(FieldSpec::new(5, 12)),
            Just(FieldSpec::new(3, 10).with_unramified(2)),
            Just(FieldSpec::new(7, 8).with_ramified()),
            Just(FieldSpec::new(5, 8).with_unramified(2).with_ramified()),
            Just(FieldSpec::new(37, 20).with_unramified(15)),
        ]
        .prop_map(|s| Field::new(s).unwrap())
    }

    proptest! {
        #[test]
        fn ring_axioms(f in any_field(), seed in any::<u64>(), va in -3i64..4, vb in -3i64..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = f.random_unit(&mut rng).shift(va);
            let b = f.random_unit(&mut rng).shift(vb);
            let c = f.random_unit(&mut rng);
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&a.inv().unwrap()), f.one());
            prop_assert_eq!(a.mul(&b).valuation(), Some(a.valuation().unwrap() + b.valuation().unwrap()));
        }

        #[test]
        fn ultrametric(f in any_field(), seed in any::<u64>(), va in -3i64..4, vb in -3i64..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = f.random_unit(&mut rng).shift(va);
            let b = f.random_unit(&mut rng).shift(vb);
            let s = a.add(&b);
            let lo = a.valuation().unwrap().min(b.valuation().unwrap());
            prop_assert!(s.val_lower().unwrap() >= lo);
            if va != vb {
                prop_assert_eq!(s.valuation(), Some(lo));
            }
        }

        #[test]
        fn sqrt_of_square(f in any_field(), seed in any::<u64>(), v in -3i64..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = f.random_unit(&mut rng).shift(v);
            let sq = a.square();
            let r = sq.sqrt().unwrap();
            prop_assert!(r == a || r == a.neg());
        }

        #[test]
        fn text_roundtrip(f in any_field(), seed in any::<u64>(), v in -3i64..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = f.random_unit(&mut rng).shift(v);
            let back = f.parse(&a.to_string()).unwrap();
            prop_assert!(back.identical(&a), "{} vs {}", a, back);
        }
    }
}
