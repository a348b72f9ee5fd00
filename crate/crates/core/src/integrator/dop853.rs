//! Dormand-Prince 8(5,3) explicit Runge-Kutta stepper with 7th order dense
//! output (Hairer, Norsett & Wanner's DOP853 tableau).
//!
//! The stepper advances one accepted step at a time so callers can run their
//! own event logic between steps. A step whose stages or endpoint are not
//! finite is rejected and retried with a smaller step; this is how the
//! right-hand sides signal leaving their domain.

// tableau entries are kept exactly as published
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

pub type State<const N: usize> = [f64; N];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub tol: Tolerances,
    /// Upper bound on `|h|`.
    pub h_max: f64,
    pub max_steps: usize,
}

/// Stage data of the last accepted step, kept for dense output.
#[derive(Debug, Clone)]
struct LastStep<const N: usize> {
    x_old: f64,
    h: f64,
    y_old: State<N>,
    y_new: State<N>,
    k: [State<N>; 12],
    f_new: State<N>,
    cont: Option<[State<N>; 8]>,
}

pub struct Dop853<F, const N: usize>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    f: F,
    cfg: StepperConfig,
    direction: f64,
    x: f64,
    y: State<N>,
    k1: State<N>,
    h: f64,
    last_rejected: bool,
    last: Option<LastStep<N>>,
    steps: usize,
    evaluations: usize,
}

impl<F, const N: usize> Dop853<F, N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    /// Starts at `(x0, y0)` integrating towards `x0 + direction * inf`.
    pub fn new(f: F, x0: f64, y0: State<N>, direction: f64, cfg: StepperConfig) -> Result<Self> {
        let k1 = f(x0, &y0);
        if !finite(&k1) || !finite(&y0) {
            return Err(Error::Numerical(format!(
                "non-finite initial state at x = {x0}"
            )));
        }
        let mut s = Self {
            f,
            cfg,
            direction: direction.signum(),
            x: x0,
            y: y0,
            k1,
            h: 0.0,
            last_rejected: false,
            last: None,
            steps: 0,
            evaluations: 1,
        };
        s.h = s.initial_step();
        Ok(s)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> &State<N> {
        &self.y
    }

    pub fn derivative(&self) -> &State<N> {
        &self.k1
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Start of the last accepted step.
    pub fn previous(&self) -> Option<(f64, State<N>)> {
        self.last.as_ref().map(|l| (l.x_old, l.y_old))
    }

    fn initial_step(&mut self) -> f64 {
        let tol = self.cfg.tol;
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            let sk = tol.atol + tol.rtol * self.y[i].abs();
            dnf += (self.k1[i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.cfg.h_max);
        let probe: State<N> = std::array::from_fn(|i| self.y[i] + self.direction * h * self.k1[i]);
        let f2 = (self.f)(self.x + self.direction * h, &probe);
        self.evaluations += 1;
        let mut der2 = 0.0;
        for ((f2i, k1i), yi) in f2.iter().zip(&self.k1).zip(&self.y) {
            let sk = tol.atol + tol.rtol * yi.abs();
            der2 += ((f2i - k1i) / sk).powi(2);
        }
        let der2 = if der2.is_finite() {
            der2.sqrt() / h
        } else {
            0.0
        };
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        (100.0 * h).min(h1).min(self.cfg.h_max)
    }

    /// Takes one accepted step, never passing `x_bound`.
    pub fn step(&mut self, x_bound: f64) -> Result<()> {
        let remaining = (x_bound - self.x) * self.direction;
        if !(remaining > 0.0) {
            return Err(Error::Input(format!(
                "step bound {x_bound} is not ahead of x = {}",
                self.x
            )));
        }
        loop {
            if self.steps >= self.cfg.max_steps {
                return Err(Error::Numerical(format!(
                    "maximum number of steps ({}) reached at x = {}",
                    self.cfg.max_steps, self.x
                )));
            }
            self.steps += 1;
            let mut h_abs = self.h.abs().min(self.cfg.h_max);
            let mut hits_bound = false;
            if h_abs >= remaining {
                h_abs = remaining;
                hits_bound = true;
            } else if h_abs > 0.5 * remaining && h_abs < remaining {
                // avoid leaving a sliver before the bound
                h_abs = 0.5 * remaining;
            }
            let spacing = 16.0 * f64::EPSILON * self.x.abs().max(1e-300);
            if h_abs <= spacing {
                return Err(Error::Numerical(format!(
                    "step size underflow at x = {}",
                    self.x
                )));
            }
            let h = self.direction * h_abs;
            let (y_new, k, err) = trial(&self.f, self.x, &self.y, &self.k1, h, self.cfg.tol);
            self.evaluations += 11;

            let f_new = if finite(&y_new) && err.is_finite() && err <= 1.0 {
                let f_new = (self.f)(self.x + h, &y_new);
                self.evaluations += 1;
                Some(f_new).filter(finite)
            } else {
                None
            };

            let Some(f_new) = f_new else {
                // rejected: either inaccurate or outside the domain
                let shrink = if err.is_finite() && err > 1.0 {
                    (1.0 / (err.powf(1.0 / 8.0) / SAFE)).clamp(FAC_MIN, 1.0)
                } else {
                    0.1
                };
                self.h = h_abs * shrink;
                self.last_rejected = true;
                continue;
            };

            let fac11 = err.powf(1.0 / 8.0);
            let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h_abs / fac;
            if self.last_rejected {
                h_new = h_new.min(h_abs);
            }
            self.last_rejected = false;
            self.last = Some(LastStep {
                x_old: self.x,
                h,
                y_old: self.y,
                y_new,
                k,
                f_new,
                cont: None,
            });
            self.x = if hits_bound { x_bound } else { self.x + h };
            self.y = y_new;
            self.k1 = f_new;
            self.h = h_new.min(self.cfg.h_max);
            return Ok(());
        }
    }

    /// Dense output on the last accepted step.
    pub fn dense(&mut self, x: f64) -> Result<State<N>> {
        self.prepare_dense()?;
        self.dense_at(x)
    }

    /// Computes the interpolation coefficients of the last accepted step
    /// (three extra stage evaluations, once per step).
    pub fn prepare_dense(&mut self) -> Result<()> {
        let f = &self.f;
        let last = self
            .last
            .as_mut()
            .ok_or_else(|| Error::Numerical("dense output requested before any step".into()))?;
        if last.cont.is_none() {
            last.cont = Some(dense_coefficients(f, last));
            self.evaluations += 3;
        }
        Ok(())
    }

    /// Dense output after `prepare_dense`.
    pub fn dense_at(&self, x: f64) -> Result<State<N>> {
        let last = self
            .last
            .as_ref()
            .ok_or_else(|| Error::Numerical("dense output requested before any step".into()))?;
        let cont = last
            .cont
            .as_ref()
            .ok_or_else(|| Error::Numerical("dense output not prepared".into()))?;
        let s = (x - last.x_old) / last.h;
        let s1 = 1.0 - s;
        Ok(std::array::from_fn(|i| {
            let conpar = cont[4][i] + s * (cont[5][i] + s1 * (cont[6][i] + s * cont[7][i]));
            cont[0][i] + s * (cont[1][i] + s1 * (cont[2][i] + s * (cont[3][i] + s1 * conpar)))
        }))
    }

    /// One untested Runge-Kutta step of size `h` from the start of the last
    /// accepted step. Used to place events at full accuracy.
    pub fn restep(&self, h: f64) -> Option<State<N>> {
        let last = self.last.as_ref()?;
        let k1 = last.k[0];
        let (y, _, _) = trial(&self.f, last.x_old, &last.y_old, &k1, h, self.cfg.tol);
        Some(y).filter(finite)
    }
}

fn finite<const N: usize>(y: &State<N>) -> bool {
    y.iter().all(|v| v.is_finite())
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

fn comb<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn lin<const N: usize>(terms: &[(f64, &State<N>)]) -> State<N> {
    std::array::from_fn(|i| terms.iter().map(|(c, k)| c * k[i]).sum())
}

/// Twelve-stage trial step; returns the 8th order solution, the stages and the
/// scaled error norm.
fn trial<F, const N: usize>(
    f: &F,
    x: f64,
    y: &State<N>,
    k1: &State<N>,
    h: f64,
    tol: Tolerances,
) -> (State<N>, [State<N>; 12], f64)
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let k1 = *k1;
    let k2 = f(x + C2 * h, &comb(y, h, &[(A21, &k1)]));
    let k3 = f(x + C3 * h, &comb(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(x + C4 * h, &comb(y, h, &[(A41, &k1), (A43, &k3)]));
    let k5 = f(
        x + C5 * h,
        &comb(y, h, &[(A51, &k1), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        x + C6 * h,
        &comb(y, h, &[(A61, &k1), (A64, &k4), (A65, &k5)]),
    );
    let k7 = f(
        x + C7 * h,
        &comb(y, h, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
    );
    let k8 = f(
        x + C8 * h,
        &comb(
            y,
            h,
            &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)],
        ),
    );
    let k9 = f(
        x + C9 * h,
        &comb(
            y,
            h,
            &[
                (A91, &k1),
                (A94, &k4),
                (A95, &k5),
                (A96, &k6),
                (A97, &k7),
                (A98, &k8),
            ],
        ),
    );
    let k10 = f(
        x + C10 * h,
        &comb(
            y,
            h,
            &[
                (A101, &k1),
                (A104, &k4),
                (A105, &k5),
                (A106, &k6),
                (A107, &k7),
                (A108, &k8),
                (A109, &k9),
            ],
        ),
    );
    let k11 = f(
        x + C11 * h,
        &comb(
            y,
            h,
            &[
                (A111, &k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ],
        ),
    );
    let k12 = f(
        x + h,
        &comb(
            y,
            h,
            &[
                (A121, &k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        ),
    );
    let incr = lin(&[
        (B1, &k1),
        (B6, &k6),
        (B7, &k7),
        (B8, &k8),
        (B9, &k9),
        (B10, &k10),
        (B11, &k11),
        (B12, &k12),
    ]);
    let y_new: State<N> = std::array::from_fn(|i| y[i] + h * incr[i]);

    let mut err5 = 0.0;
    let mut err3 = 0.0;
    for i in 0..N {
        let sk = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        let e3 = incr[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
        let e5 = ER1 * k1[i]
            + ER6 * k6[i]
            + ER7 * k7[i]
            + ER8 * k8[i]
            + ER9 * k9[i]
            + ER10 * k10[i]
            + ER11 * k11[i]
            + ER12 * k12[i];
        err3 += (e3 / sk).powi(2);
        err5 += (e5 / sk).powi(2);
    }
    let mut deno = err5 + 0.01 * err3;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err5 * (1.0 / (deno * N as f64)).sqrt();
    (
        y_new,
        [k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12],
        err,
    )
}

fn dense_coefficients<F, const N: usize>(f: &F, last: &LastStep<N>) -> [State<N>; 8]
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let h = last.h;
    let x = last.x_old;
    let y = &last.y_old;
    let [k1, _k2, _k3, _k4, _k5, k6, k7, k8, k9, k10, k11, k12] = &last.k;
    let k13 = &last.f_new;

    let ydiff: State<N> = std::array::from_fn(|i| last.y_new[i] - y[i]);
    let bspl: State<N> = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
    let c4: State<N> = std::array::from_fn(|i| ydiff[i] - h * k13[i] - bspl[i]);

    let k14 = f(
        x + C14 * h,
        &comb(
            y,
            h,
            &[
                (A141, k1),
                (A147, k7),
                (A148, k8),
                (A149, k9),
                (A1410, k10),
                (A1411, k11),
                (A1412, k12),
                (A1413, k13),
            ],
        ),
    );
    let k15 = f(
        x + C15 * h,
        &comb(
            y,
            h,
            &[
                (A151, k1),
                (A156, k6),
                (A157, k7),
                (A158, k8),
                (A1511, k11),
                (A1512, k12),
                (A1513, k13),
                (A1514, &k14),
            ],
        ),
    );
    let k16 = f(
        x + C16 * h,
        &comb(
            y,
            h,
            &[
                (A161, k1),
                (A166, k6),
                (A167, k7),
                (A168, k8),
                (A169, k9),
                (A1613, k13),
                (A1614, &k14),
                (A1615, &k15),
            ],
        ),
    );
    let row = |d: &[f64; 12]| -> State<N> {
        let v = lin(&[
            (d[0], k1),
            (d[1], k6),
            (d[2], k7),
            (d[3], k8),
            (d[4], k9),
            (d[5], k10),
            (d[6], k11),
            (d[7], k12),
            (d[8], k13),
            (d[9], &k14),
            (d[10], &k15),
            (d[11], &k16),
        ]);
        std::array::from_fn(|i| h * v[i])
    };
    [*y, ydiff, bspl, c4, row(&D4), row(&D5), row(&D6), row(&D7)]
}

const C2: f64 = 0.526001519587677318785587544488e-01;
const C3: f64 = 0.789002279381515978178381316732e-01;
const C4: f64 = 0.118350341907227396726757197510e+00;
const C5: f64 = 0.281649658092772603273242802490e+00;
const C6: f64 = 0.333333333333333333333333333333e+00;
const C7: f64 = 0.25e+00;
const C8: f64 = 0.307692307692307692307692307692e+00;
const C9: f64 = 0.651282051282051282051282051282e+00;
const C10: f64 = 0.6e+00;
const C11: f64 = 0.857142857142857142857142857142e+00;
const C14: f64 = 0.1e+00;
const C15: f64 = 0.2e+00;
const C16: f64 = 0.777777777777777777777777777778e+00;

const A21: f64 = 5.26001519587677318785587544488e-2;
const A31: f64 = 1.97250569845378994544595329183e-2;
const A32: f64 = 5.91751709536136983633785987549e-2;
const A41: f64 = 2.95875854768068491816892993775e-2;
const A43: f64 = 8.87627564304205475450678981324e-2;
const A51: f64 = 2.41365134159266685502369798665e-1;
const A53: f64 = -8.84549479328286085344864962717e-1;
const A54: f64 = 9.24834003261792003115737966543e-1;
const A61: f64 = 3.7037037037037037037037037037e-2;
const A64: f64 = 1.70828608729473871279604482173e-1;
const A65: f64 = 1.25467687566822425016691814123e-1;
const A71: f64 = 3.7109375e-2;
const A74: f64 = 1.70252211019544039314978060272e-1;
const A75: f64 = 6.02165389804559606850219397283e-2;
const A76: f64 = -1.7578125e-2;
const A81: f64 = 3.70920001185047927108779319836e-2;
const A84: f64 = 1.70383925712239993810214054705e-1;
const A85: f64 = 1.07262030446373284651809199168e-1;
const A86: f64 = -1.53194377486244017527936158236e-2;
const A87: f64 = 8.27378916381402288758473766002e-3;
const A91: f64 = 6.24110958716075717114429577812e-1;
const A94: f64 = -3.36089262944694129406857109825e0;
const A95: f64 = -8.68219346841726006818189891453e-1;
const A96: f64 = 2.75920996994467083049415600797e1;
const A97: f64 = 2.01540675504778934086186788979e1;
const A98: f64 = -4.34898841810699588477366255144e1;
const A101: f64 = 4.77662536438264365890433908527e-1;
const A104: f64 = -2.48811461997166764192642586468e0;
const A105: f64 = -5.90290826836842996371446475743e-1;
const A106: f64 = 2.12300514481811942347288949897e1;
const A107: f64 = 1.52792336328824235832596922938e1;
const A108: f64 = -3.32882109689848629194453265587e1;
const A109: f64 = -2.03312017085086261358222928593e-2;
const A111: f64 = -9.3714243008598732571704021658e-1;
const A114: f64 = 5.18637242884406370830023853209e0;
const A115: f64 = 1.09143734899672957818500254654e0;
const A116: f64 = -8.14978701074692612513997267357e0;
const A117: f64 = -1.85200656599969598641566180701e1;
const A118: f64 = 2.27394870993505042818970056734e1;
const A119: f64 = 2.49360555267965238987089396762e0;
const A1110: f64 = -3.0467644718982195003823669022e0;
const A121: f64 = 2.27331014751653820792359768449e0;
const A124: f64 = -1.05344954667372501984066689879e1;
const A125: f64 = -2.00087205822486249909675718444e0;
const A126: f64 = -1.79589318631187989172765950534e1;
const A127: f64 = 2.79488845294199600508499808837e1;
const A128: f64 = -2.85899827713502369474065508674e0;
const A129: f64 = -8.87285693353062954433549289258e0;
const A1210: f64 = 1.23605671757943030647266201528e1;
const A1211: f64 = 6.43392746015763530355970484046e-1;

const A141: f64 = 5.61675022830479523392909219681e-2;
const A147: f64 = 2.53500210216624811088794765333e-1;
const A148: f64 = -2.46239037470802489917441475441e-1;
const A149: f64 = -1.24191423263816360469010140626e-1;
const A1410: f64 = 1.5329179827876569731206322685e-1;
const A1411: f64 = 8.20105229563468988491666602057e-3;
const A1412: f64 = 7.56789766054569976138603589584e-3;
const A1413: f64 = -8.298e-3;
const A151: f64 = 3.18346481635021405060768473261e-2;
const A156: f64 = 2.83009096723667755288322961402e-2;
const A157: f64 = 5.35419883074385676223797384372e-2;
const A158: f64 = -5.49237485713909884646569340306e-2;
const A1511: f64 = -1.08347328697249322858509316994e-4;
const A1512: f64 = 3.82571090835658412954920192323e-4;
const A1513: f64 = -3.40465008687404560802977114492e-4;
const A1514: f64 = 1.41312443674632500278074618366e-1;
const A161: f64 = -4.28896301583791923408573538692e-1;
const A166: f64 = -4.69762141536116384314449447206e0;
const A167: f64 = 7.68342119606259904184240953878e0;
const A168: f64 = 4.06898981839711007970213554331e0;
const A169: f64 = 3.56727187455281109270669543021e-1;
const A1613: f64 = -1.39902416515901462129418009734e-3;
const A1614: f64 = 2.9475147891527723389556272149e0;
const A1615: f64 = -9.15095847217987001081870187138e0;

const B1: f64 = 5.42937341165687622380535766363e-2;
const B6: f64 = 4.45031289275240888144113950566e0;
const B7: f64 = 1.89151789931450038304281599044e0;
const B8: f64 = -5.8012039600105847814672114227e0;
const B9: f64 = 3.1116436695781989440891606237e-1;
const B10: f64 = -1.52160949662516078556178806805e-1;
const B11: f64 = 2.01365400804030348374776537501e-1;
const B12: f64 = 4.47106157277725905176885569043e-2;

const BHH1: f64 = 0.244094488188976377952755905512e+00;
const BHH2: f64 = 0.733846688281611857341361741547e+00;
const BHH3: f64 = 0.220588235294117647058823529412e-01;

const ER1: f64 = 0.1312004499419488073250102996e-01;
const ER6: f64 = -0.1225156446376204440720569753e+01;
const ER7: f64 = -0.4957589496572501915214079952e+00;
const ER8: f64 = 0.1664377182454986536961530415e+01;
const ER9: f64 = -0.3503288487499736816886487290e+00;
const ER10: f64 = 0.3341791187130174790297318841e+00;
const ER11: f64 = 0.8192320648511571246570742613e-01;
const ER12: f64 = -0.2235530786388629525884427845e-01;

// dense output rows, ordered as k1, k6..k12, k13 = f(x + h, y_new), k14..k16
const D4: [f64; 12] = [
    -0.84289382761090128651353491142e+01,
    0.56671495351937776962531783590e+00,
    -0.30689499459498916912797304727e+01,
    0.23846676565120698287728149680e+01,
    0.21170345824450282767155149946e+01,
    -0.87139158377797299206789907490e+00,
    0.22404374302607882758541771650e+01,
    0.63157877876946881815570249290e+00,
    -0.88990336451333310820698117400e-01,
    0.18148505520854727256656404962e+02,
    -0.91946323924783554000451984436e+01,
    -0.44360363875948939664310572000e+01,
];
const D5: [f64; 12] = [
    0.10427508642579134603413151009e+02,
    0.24228349177525818288430175319e+03,
    0.16520045171727028198505394887e+03,
    -0.37454675472269020279518312152e+03,
    -0.22113666853125306036270938578e+02,
    0.77334326684722638389603898808e+01,
    -0.30674084731089398182061213626e+02,
    -0.93321305264302278729567221706e+01,
    0.15697238121770843886131091075e+02,
    -0.31139403219565177677282850411e+02,
    -0.93529243588444783865713862664e+01,
    0.35816841486394083752465898540e+02,
];
const D6: [f64; 12] = [
    0.19985053242002433820987653617e+02,
    -0.38703730874935176555105901742e+03,
    -0.18917813819516756882830838328e+03,
    0.52780815920542364900561016686e+03,
    -0.11573902539959630126141871134e+02,
    0.68812326946963000169666922661e+01,
    -0.10006050966910838403183860980e+01,
    0.77771377980534432092869265740e+00,
    -0.27782057523535084065932004339e+01,
    -0.60196695231264120758267380846e+02,
    0.84320405506677161018159903784e+02,
    0.11992291136182789328035130030e+02,
];
const D7: [f64; 12] = [
    -0.25693933462703749003312586129e+02,
    -0.15418974869023643374053993627e+03,
    -0.23152937917604549567536039109e+03,
    0.35763911791061412378285349910e+03,
    0.93405324183624310003907691704e+02,
    -0.37458323136451633156875139351e+02,
    0.10409964950896230045147246184e+03,
    0.29840293426660503123344363579e+02,
    -0.43533456590011143754432175058e+02,
    0.96324553959188282948394950600e+02,
    -0.39177261675615439165231486172e+02,
    -0.14972683625798562581422125276e+03,
];

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rtol: f64) -> StepperConfig {
        StepperConfig {
            tol: Tolerances {
                rtol,
                atol: rtol * 1e-2,
            },
            h_max: 1.0,
            max_steps: 100_000,
        }
    }

    #[test]
    fn harmonic_oscillator_over_ten_periods() {
        let f = |_x: f64, y: &State<2>| [y[1], -y[0]];
        let mut s = Dop853::new(f, 0.0, [1.0, 0.0], 1.0, cfg(1e-12)).unwrap();
        let end = 20.0 * std::f64::consts::PI;
        while s.x() < end {
            s.step(end).unwrap();
        }
        assert_eq!(s.x(), end);
        assert!((s.y()[0] - 1.0).abs() < 1e-10, "{:?}", s.y());
        assert!(s.y()[1].abs() < 1e-10);
    }

    #[test]
    fn dense_output_is_seventh_order_accurate() {
        let f = |_x: f64, y: &State<1>| [y[0]];
        let mut s = Dop853::new(f, 0.0, [1.0], 1.0, cfg(1e-6)).unwrap();
        s.step(1.0).unwrap();
        let (x0, _) = s.previous().unwrap();
        let x1 = s.x();
        for j in 1..10 {
            let x = x0 + (x1 - x0) * j as f64 / 10.0;
            let y = s.dense(x).unwrap()[0];
            assert!((y - x.exp()).abs() < 1e-8 * x.exp(), "x = {x}");
        }
    }

    #[test]
    fn backwards_integration() {
        let f = |_x: f64, y: &State<1>| [-2.0 * y[0]];
        let mut s = Dop853::new(f, 1.0, [1.0], -1.0, cfg(1e-12)).unwrap();
        while s.x() > 0.0 {
            s.step(0.0).unwrap();
        }
        assert!((s.y()[0] - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn domain_exit_is_rejected_not_accepted() {
        // y' = -1/(2 sqrt(y)) reaches y = 0 at x = 4/3 and is undefined after
        let f = |_x: f64, y: &State<1>| [-0.5 / y[0].sqrt()];
        let mut s = Dop853::new(f, 0.0, [1.0], 1.0, cfg(1e-10)).unwrap();
        let mut failed = false;
        for _ in 0..10_000 {
            match s.step(2.0) {
                Ok(()) => assert!(s.y()[0] > 0.0),
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        assert!(failed);
        assert!(
            s.x() < 4.0 / 3.0 && s.x() > 4.0 / 3.0 - 1e-6,
            "stopped at {}",
            s.x()
        );
    }
}
