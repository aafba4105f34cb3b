//! The four-activity controller.
//!
//! Tacit (TAC) and exploratory (EXP) generation propose substitutions for
//! every region, the analytic activity (AN) checks the mental image and the
//! executed artwork, and reflective rules (REF) decide how to go on after a
//! failed check. Every step is logged with its activity so the path through
//! the four quadrants can be replayed.

use serde::{Deserialize, Serialize};

use crate::agent::AgentState;
use crate::error::{Error, Result};
use crate::imagefeat::{color_histogram, ColorSpace};
use crate::memory::{EntryId, HubRef, Memory, PatchEntry};
use crate::raster::{RasterImage, Rect};
use crate::render::{self, resample_gray, ExecutionConfig, FaceTemplate, InternalEval, TEMPLATE_SIZE};
use crate::segment::{segment_image, Region, DEFAULT_VARIANCE_THRESHOLD};

pub const SOURCE_DOMAIN: &str = "faces";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    #[serde(rename = "EXP")]
    Exp,
    #[serde(rename = "TAC")]
    Tac,
    #[serde(rename = "AN")]
    An,
    #[serde(rename = "REF")]
    Ref,
}

impl std::fmt::Display for Quadrant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quadrant::Exp => "EXP",
            Quadrant::Tac => "TAC",
            Quadrant::An => "AN",
            Quadrant::Ref => "REF",
        })
    }
}

/// Transitions the controller may take between consecutive provenance
/// steps. S1 steps (TAC, EXP) interleave freely while regions are filled,
/// S1 hands over to AN, AN either continues to the execution check or
/// hands a failure to REF, and REF restarts S1 or re-runs the check.
pub fn transition_permitted(from: Quadrant, to: Quadrant) -> bool {
    use Quadrant::*;
    matches!(
        (from, to),
        (Tac, Tac) | (Tac, Exp) | (Exp, Tac) | (Exp, Exp) | (Tac, An) | (Exp, An) | (An, An) | (An, Ref) | (Ref, Tac) | (Ref, Exp) | (Ref, An)
    )
}

/// First offending transition in a provenance log, if any.
pub fn check_provenance(steps: &[ProvenanceStep]) -> std::result::Result<(), (usize, Quadrant, Quadrant)> {
    if let Some(first) = steps.first() {
        if !matches!(first.quadrant, Quadrant::Tac | Quadrant::Exp) {
            return Err((0, first.quadrant, first.quadrant));
        }
    }
    for (i, w) in steps.windows(2).enumerate() {
        if !transition_permitted(w[0].quadrant, w[1].quadrant) {
            return Err((i + 1, w[0].quadrant, w[1].quadrant));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    PortraitByAssociation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreativeTask {
    pub kind: TaskKind,
    pub source_domain: String,
    pub target_domain: String,
}

impl CreativeTask {
    pub fn portrait(target_domain: impl Into<String>) -> Self {
        CreativeTask {
            kind: TaskKind::PortraitByAssociation,
            source_domain: SOURCE_DOMAIN.to_string(),
            target_domain: target_domain.into(),
        }
    }

    pub fn validate(&self, memory: &Memory) -> Result<()> {
        if self.source_domain == self.target_domain {
            return Err(Error::invalid("source and target domain must differ"));
        }
        memory.domain(&self.source_domain)?;
        memory.domain(&self.target_domain)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Substitution<'m> {
    /// Index into the session's region list.
    pub region: usize,
    pub candidate: &'m PatchEntry,
    pub quadrant: Quadrant,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub face_score: f64,
    pub face_pass: bool,
    pub expectation_score: f64,
    pub expectation_pass: bool,
    pub tau_face: f64,
    pub tau_exp: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.face_pass && self.expectation_pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReflectiveDecision {
    RetryExplore { radius: usize },
    RelaxThreshold { tau_face: f64 },
    ChangeDomain { domain: String },
    Abandon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CreativeConfig {
    pub r_max: usize,
    pub n_retry: usize,
    pub tau_exp: f64,
    pub sigma_e: f64,
    pub relax_step: f64,
    pub variance_threshold: f64,
    pub accept_threshold: f64,
    pub check_scales: Vec<f64>,
    pub execution: ExecutionConfig,
}

impl Default for CreativeConfig {
    fn default() -> Self {
        CreativeConfig {
            r_max: 8,
            n_retry: 3,
            tau_exp: 0.3,
            sigma_e: 3.0,
            relax_step: 0.1,
            variance_threshold: DEFAULT_VARIANCE_THRESHOLD,
            accept_threshold: 0.7,
            check_scales: vec![1.0, 0.75, 0.5],
            execution: ExecutionConfig::default(),
        }
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Mean HSV histogram of a domain's entries; all zeros for an empty domain.
pub fn domain_mean_hsv(memory: &Memory, domain: &str) -> Result<Vec<f64>> {
    let d = memory.domain(domain)?;
    let mut mean = vec![0.0; 30];
    for e in &d.entries {
        for (m, b) in mean.iter_mut().zip(e.features.hsv.bins.iter()) {
            *m += b;
        }
    }
    if !d.entries.is_empty() {
        mean.iter_mut().for_each(|m| *m /= d.entries.len() as f64);
    }
    Ok(mean)
}

/// Candidate target domains (every domain but the source) with their
/// cosine similarity to the inspiration's HSV histogram, best first; ties
/// keep name order.
pub fn rank_target_domains(memory: &Memory, inspiration: &RasterImage) -> Result<Vec<(String, f64)>> {
    let h = color_histogram(inspiration, ColorSpace::Hsv)?;
    let mut out = Vec::new();
    for name in memory.domains.keys().filter(|n| n.as_str() != SOURCE_DOMAIN) {
        out.push((name.clone(), cosine(&h.bins, &domain_mean_hsv(memory, name)?)));
    }
    if out.is_empty() {
        return Err(Error::InvalidState("no target domain besides faces".into()));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(out)
}

pub fn choose_target_domain(memory: &Memory, inspiration: &RasterImage, exclude: &[String]) -> Result<String> {
    rank_target_domains(memory, inspiration)?
        .into_iter()
        .map(|(n, _)| n)
        .find(|n| !exclude.contains(n))
        .ok_or_else(|| Error::InvalidState("every target domain already used".into()))
}

/// Default association: co-located hub entries (radius 0), most similar one.
pub fn tacit_default<'m>(memory: &'m Memory, region: &Region, region_index: usize, target: &str) -> Result<Substitution<'m>> {
    let cands: Vec<&PatchEntry> =
        memory.cross_domain_candidates(&region.features.general, target, 0)?.into_iter().map(|c| c.entry).collect();
    let (candidate, distance) = memory.select_substitute(&cands, &region.features)?;
    Ok(Substitution { region: region_index, candidate, quadrant: Quadrant::Tac, distance })
}

/// Every target entry within `radius` on the hub, ranked by detail distance
/// (ties by id).
pub fn exploratory_candidates<'m>(
    memory: &'m Memory,
    region: &Region,
    region_index: usize,
    target: &str,
    radius: usize,
) -> Result<Vec<Substitution<'m>>> {
    if radius == 0 {
        return Err(Error::invalid("exploration needs a radius of at least 1"));
    }
    let mut out: Vec<Substitution<'m>> = memory
        .cross_domain_candidates(&region.features.general, target, radius)?
        .into_iter()
        .map(|c| Substitution {
            region: region_index,
            candidate: c.entry,
            quadrant: Quadrant::Exp,
            distance: memory.metric.distance(&c.entry.features, &region.features),
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.candidate.id.cmp(&b.candidate.id)));
    Ok(out)
}

/// Pastes each substitution's patch, bilinearly resampled, over its region.
pub fn compose_mental_image(input: &RasterImage, regions: &[Region], subs: &[Substitution<'_>]) -> Result<RasterImage> {
    let mut seen = vec![false; regions.len()];
    for s in subs {
        let slot = seen.get_mut(s.region).ok_or_else(|| Error::invalid("substitution for unknown region"))?;
        if std::mem::replace(slot, true) {
            return Err(Error::invalid("two substitutions for one region"));
        }
    }
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            if regions[a.region].rect.overlaps(&regions[b.region].rect) {
                return Err(Error::invalid("overlapping substitution regions"));
            }
        }
    }
    let mut out = input.clone();
    for s in subs {
        let r = regions[s.region].rect;
        let patch = s.candidate.image.resize_bilinear(r.w, r.h)?;
        out.blit(&patch, r.x, r.y)?;
    }
    Ok(out)
}

fn ncc(window: impl Iterator<Item = f64> + Clone, t: &[f64], t_mean: f64, t_norm: f64) -> f64 {
    let n = t.len() as f64;
    let mean = window.clone().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, &b) in window.zip(t) {
        let da = a - mean;
        num += da * (b - t_mean);
        den += da * da;
    }
    if den <= 0.0 || t_norm <= 0.0 {
        0.0
    } else {
        num / (den.sqrt() * t_norm)
    }
}

/// Best normalized cross-correlation between the template and the image,
/// searched over template scales relative to a 64x64 working copy of the
/// image. Negative correlations count as zero.
pub fn face_score(img: &RasterImage, template: &FaceTemplate, scales: &[f64]) -> f64 {
    let n = TEMPLATE_SIZE;
    let work = resample_gray(&img.luma(), img.width(), img.height(), n, n);
    let mut best = f64::NEG_INFINITY;
    for &s in scales {
        let ts = ((n as f64 * s).round() as usize).clamp(2, n);
        let t = template.resized(ts, ts);
        let t_mean = t.iter().sum::<f64>() / t.len() as f64;
        let t_norm = t.iter().map(|v| (v - t_mean).powi(2)).sum::<f64>().sqrt();
        for oy in 0..=n - ts {
            for ox in 0..=n - ts {
                let window = (0..ts * ts).map(|i| work[(oy + i / ts) * n + ox + i % ts]);
                best = best.max(ncc(window, &t, t_mean, t_norm));
            }
        }
    }
    best.max(0.0)
}

/// exp(-d²/σ²) averaged over substitutions; 1 when nothing was substituted.
pub fn expectation_score(subs: &[Substitution<'_>], sigma_e: f64) -> f64 {
    if subs.is_empty() {
        return 1.0;
    }
    subs.iter().map(|s| (-(s.distance * s.distance) / (sigma_e * sigma_e)).exp()).sum::<f64>() / subs.len() as f64
}

pub fn analytic_check(
    mental: &RasterImage,
    template: &FaceTemplate,
    subs: &[Substitution<'_>],
    tau_face: f64,
    cfg: &CreativeConfig,
) -> CheckResult {
    let face = face_score(mental, template, &cfg.check_scales);
    let expectation = expectation_score(subs, cfg.sigma_e);
    CheckResult {
        face_score: face,
        face_pass: face >= tau_face,
        expectation_score: expectation,
        expectation_pass: expectation >= cfg.tau_exp,
        tau_face,
        tau_exp: cfg.tau_exp,
    }
}

/// What the reflective rules see after a failed check.
#[derive(Debug, Clone)]
pub struct ReflectContext<'a> {
    pub check: &'a CheckResult,
    /// Failures already seen in the current target domain (0 for the first).
    pub attempt: usize,
    /// Radius the failed exploration used.
    pub radius: usize,
    pub tau_face: f64,
    pub tau_lo: f64,
    /// Next unused target domain by inspiration ranking.
    pub next_domain: Option<String>,
    /// The mental image had no substitution at all.
    pub nothing_substituted: bool,
    /// The current target domain holds no entries.
    pub target_empty: bool,
}

/// Rule order: widen the exploration while retries remain, then relax the
/// face threshold down to its floor, then switch to another domain, then
/// give up. Widening and relaxing cannot help an empty domain, and relaxing
/// cannot help when nothing was substituted.
pub fn reflective_decide(ctx: &ReflectContext<'_>, cfg: &CreativeConfig) -> ReflectiveDecision {
    if !ctx.target_empty {
        if ctx.attempt < cfg.n_retry {
            return ReflectiveDecision::RetryExplore { radius: ctx.radius + 1 };
        }
        let face_failed = !ctx.check.face_pass && !ctx.nothing_substituted;
        if face_failed && ctx.tau_face > ctx.tau_lo {
            return ReflectiveDecision::RelaxThreshold { tau_face: ctx.tau_lo.max(ctx.tau_face - cfg.relax_step) };
        }
    }
    match &ctx.next_domain {
        Some(d) => ReflectiveDecision::ChangeDomain { domain: d.clone() },
        None => ReflectiveDecision::Abandon,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    TacitRecall {
        region: usize,
        domain: String,
        chosen: Option<EntryId>,
        distance: Option<f64>,
    },
    Explore {
        region: usize,
        domain: String,
        radius: usize,
        base_radius: usize,
        widening: usize,
        resolution_level: f64,
        candidates: usize,
        chosen: Option<EntryId>,
        distance: Option<f64>,
    },
    MentalCheck {
        check: CheckResult,
        substituted: usize,
    },
    ExecutionCheck {
        config: ExecutionConfig,
        eval: InternalEval,
    },
    Reflect {
        decision: ReflectiveDecision,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceStep {
    pub quadrant: Quadrant,
    pub action: Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArtworkStatus {
    Accepted,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub rect: Rect,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionRecord {
    pub region: usize,
    pub entry: HubRef,
    pub source: String,
    pub quadrant: Quadrant,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau_face_initial: f64,
    pub tau_face_final: f64,
    pub tau_lo: f64,
    pub tau_exp: f64,
    pub sigma_e: f64,
    pub accept_threshold: f64,
    pub r_max: usize,
    pub decision_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtworkRecord {
    pub id: String,
    pub task: CreativeTask,
    pub input_ref: String,
    pub seed: u64,
    pub created_at: String,
    pub resolution_level: f64,
    pub activation: f64,
    pub regions: Vec<RegionRecord>,
    pub substitutions: Vec<SubstitutionRecord>,
    pub decisions: Vec<ReflectiveDecision>,
    pub thresholds: Thresholds,
    pub provenance: Vec<ProvenanceStep>,
    pub analytic_checks: usize,
    pub mental_ref: Option<String>,
    pub executed_ref: Option<String>,
    pub internal_eval: Option<InternalEval>,
    pub status: ArtworkStatus,
}

impl ArtworkRecord {
    pub fn substituted_fraction(&self) -> f64 {
        if self.regions.is_empty() {
            0.0
        } else {
            self.substitutions.len() as f64 / self.regions.len() as f64
        }
    }
}

/// A finished session: the record plus the images it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Artwork {
    pub record: ArtworkRecord,
    pub mental: Option<RasterImage>,
    pub executed: Option<RasterImage>,
}

/// Identity and bookkeeping for one session.
#[derive(Debug, Clone)]
pub struct SessionMeta {
    pub artwork_id: String,
    pub input_ref: String,
    pub seed: u64,
    pub created_at: String,
}

impl SessionMeta {
    pub fn mental_ref(&self) -> String {
        format!("artworks/{}-mental.png", self.artwork_id)
    }

    pub fn executed_ref(&self) -> String {
        format!("artworks/{}.png", self.artwork_id)
    }
}

/// Everything a creative session reads but never changes.
pub struct Studio<'a> {
    pub memory: &'a Memory,
    pub template: &'a FaceTemplate,
    pub config: &'a CreativeConfig,
}

impl<'a> Studio<'a> {
    /// Runs one portrait-by-association session.
    ///
    /// `checkpoint` is called before every analytic check and may change the
    /// agent state (pending ratings). The session makes at most
    /// `n_retry * |domains|` reflective decisions, the last of which is
    /// forced to be `Abandon`, so it performs at most that many checks.
    pub fn run_task(
        &self,
        task: &CreativeTask,
        input: &RasterImage,
        state: &mut AgentState,
        meta: &SessionMeta,
        checkpoint: &mut dyn FnMut(&mut AgentState),
    ) -> Result<Artwork> {
        task.validate(self.memory)?;
        let cfg = self.config;
        let memory = self.memory;
        let regions = segment_image(input, state.resolution_level, cfg.variance_threshold)?;
        let ranking: Vec<String> = rank_target_domains(memory, input)?.into_iter().map(|(n, _)| n).collect();
        let budget = (cfg.n_retry * memory.domains.len()).max(1);
        let tau_lo = state.config.tau_lo;
        let start_rl = state.resolution_level;
        let start_activation = state.activation;
        let tau_initial = state.check_strictness();

        let mut target = task.target_domain.clone();
        let mut used = vec![target.clone()];
        let mut attempt = 0usize;
        let mut widening = 0usize;
        let mut relaxed: Option<f64> = None;
        let mut provenance: Vec<ProvenanceStep> = Vec::new();
        let mut decisions: Vec<ReflectiveDecision> = Vec::new();
        let mut checks = 0usize;
        let mut subs: Vec<Substitution<'a>> = Vec::new();
        let mut mental = input.clone();
        let mut radius = 0usize;
        let mut tau_face;
        let mut regenerate = true;

        let accepted = loop {
            if regenerate {
                subs.clear();
                let base = state.exploration_radius(cfg.r_max);
                radius = base + widening;
                for (i, region) in regions.iter().enumerate() {
                    match tacit_default(memory, region, i, &target) {
                        Ok(s) => {
                            provenance.push(ProvenanceStep {
                                quadrant: Quadrant::Tac,
                                action: Action::TacitRecall {
                                    region: i,
                                    domain: target.clone(),
                                    chosen: Some(s.candidate.id),
                                    distance: Some(s.distance),
                                },
                            });
                            subs.push(s);
                            continue;
                        }
                        Err(Error::EmptyCandidates { .. }) => provenance.push(ProvenanceStep {
                            quadrant: Quadrant::Tac,
                            action: Action::TacitRecall { region: i, domain: target.clone(), chosen: None, distance: None },
                        }),
                        Err(e) => return Err(e),
                    }
                    if radius == 0 {
                        continue;
                    }
                    let (found, best) = match exploratory_candidates(memory, region, i, &target, radius) {
                        Ok(list) => (list.len(), list.first().copied()),
                        Err(Error::EmptyCandidates { .. }) => (0, None),
                        Err(e) => return Err(e),
                    };
                    provenance.push(ProvenanceStep {
                        quadrant: Quadrant::Exp,
                        action: Action::Explore {
                            region: i,
                            domain: target.clone(),
                            radius,
                            base_radius: base,
                            widening,
                            resolution_level: state.resolution_level,
                            candidates: found,
                            chosen: best.map(|s| s.candidate.id),
                            distance: best.map(|s| s.distance),
                        },
                    });
                    subs.extend(best);
                }
                mental = compose_mental_image(input, &regions, &subs)?;
            }

            checkpoint(state);
            tau_face = relaxed.unwrap_or_else(|| state.check_strictness());
            let check = analytic_check(&mental, self.template, &subs, tau_face, cfg);
            checks += 1;
            provenance.push(ProvenanceStep {
                quadrant: Quadrant::An,
                action: Action::MentalCheck { check, substituted: subs.len() },
            });
            if check.passed() && !subs.is_empty() {
                break true;
            }

            let decision = if decisions.len() + 1 >= budget {
                ReflectiveDecision::Abandon
            } else {
                let ctx = ReflectContext {
                    check: &check,
                    attempt,
                    radius,
                    tau_face,
                    tau_lo,
                    next_domain: ranking.iter().find(|d| !used.contains(d)).cloned(),
                    nothing_substituted: subs.is_empty(),
                    target_empty: memory.domain(&target)?.is_empty(),
                };
                reflective_decide(&ctx, cfg)
            };
            provenance.push(ProvenanceStep { quadrant: Quadrant::Ref, action: Action::Reflect { decision: decision.clone() } });
            decisions.push(decision.clone());
            match decision {
                ReflectiveDecision::RetryExplore { .. } => {
                    widening += 1;
                    attempt += 1;
                    regenerate = true;
                }
                ReflectiveDecision::RelaxThreshold { tau_face } => {
                    relaxed = Some(tau_face);
                    attempt += 1;
                    regenerate = false;
                }
                ReflectiveDecision::ChangeDomain { domain } => {
                    used.push(domain.clone());
                    target = domain;
                    attempt = 0;
                    widening = 0;
                    regenerate = true;
                }
                ReflectiveDecision::Abandon => break false,
            }
        };

        let substitutions = subs
            .iter()
            .map(|s| SubstitutionRecord {
                region: s.region,
                entry: HubRef { domain: s.candidate.domain.clone(), id: s.candidate.id },
                source: s.candidate.source.to_string(),
                quadrant: s.quadrant,
                distance: s.distance,
            })
            .collect();
        let mut record = ArtworkRecord {
            id: meta.artwork_id.clone(),
            task: CreativeTask { target_domain: target.clone(), ..task.clone() },
            input_ref: meta.input_ref.clone(),
            seed: meta.seed,
            created_at: meta.created_at.clone(),
            resolution_level: start_rl,
            activation: start_activation,
            regions: regions.iter().map(|r| RegionRecord { rect: r.rect, depth: r.depth }).collect(),
            substitutions,
            decisions,
            thresholds: Thresholds {
                tau_face_initial: tau_initial,
                tau_face_final: tau_face,
                tau_lo,
                tau_exp: cfg.tau_exp,
                sigma_e: cfg.sigma_e,
                accept_threshold: cfg.accept_threshold,
                r_max: cfg.r_max,
                decision_budget: budget,
            },
            provenance,
            analytic_checks: checks,
            mental_ref: None,
            executed_ref: None,
            internal_eval: None,
            status: ArtworkStatus::Abandoned,
        };

        if !accepted {
            state.update_competence(false);
            return Ok(Artwork { record, mental: None, executed: None });
        }

        let mut exec_cfg = ExecutionConfig { seed: meta.seed, ..cfg.execution };
        let mut executed = render::execute(&mental, &exec_cfg)?;
        let mut eval = render::internal_eval(&executed, &mental, cfg.accept_threshold)?;
        record.provenance.push(ProvenanceStep { quadrant: Quadrant::An, action: Action::ExecutionCheck { config: exec_cfg, eval } });
        if !eval.pass {
            exec_cfg = exec_cfg.replanned();
            executed = render::execute(&mental, &exec_cfg)?;
            eval = render::internal_eval(&executed, &mental, cfg.accept_threshold)?;
            record.provenance.push(ProvenanceStep { quadrant: Quadrant::An, action: Action::ExecutionCheck { config: exec_cfg, eval } });
        }
        state.update_competence(eval.pass);
        state.artworks_made += 1;
        record.status = ArtworkStatus::Accepted;
        record.internal_eval = Some(eval);
        record.mental_ref = Some(meta.mental_ref());
        record.executed_ref = Some(meta.executed_ref());
        Ok(Artwork { record, mental: Some(mental), executed: Some(executed) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(face_pass: bool) -> CheckResult {
        CheckResult { face_score: 0.2, face_pass, expectation_score: 1.0, expectation_pass: true, tau_face: 0.75, tau_exp: 0.3 }
    }

    fn ctx<'a>(c: &'a CheckResult, attempt: usize, tau: f64, next: Option<&str>) -> ReflectContext<'a> {
        ReflectContext {
            check: c,
            attempt,
            radius: 2,
            tau_face: tau,
            tau_lo: 0.35,
            next_domain: next.map(str::to_string),
            nothing_substituted: false,
            target_empty: false,
        }
    }

    #[test]
    fn reflective_rule_order() {
        let cfg = CreativeConfig::default();
        let c = check(false);
        assert_eq!(reflective_decide(&ctx(&c, 0, 0.75, None), &cfg), ReflectiveDecision::RetryExplore { radius: 3 });
        match reflective_decide(&ctx(&c, 3, 0.75, None), &cfg) {
            ReflectiveDecision::RelaxThreshold { tau_face } => assert!((tau_face - 0.65).abs() < 1e-12),
            d => panic!("{d:?}"),
        }
        match reflective_decide(&ctx(&c, 3, 0.4, None), &cfg) {
            ReflectiveDecision::RelaxThreshold { tau_face } => assert_eq!(tau_face, 0.35),
            d => panic!("{d:?}"),
        }
        assert_eq!(
            reflective_decide(&ctx(&c, 3, 0.35, Some("leaves")), &cfg),
            ReflectiveDecision::ChangeDomain { domain: "leaves".into() }
        );
        assert_eq!(reflective_decide(&ctx(&c, 3, 0.35, None), &cfg), ReflectiveDecision::Abandon);
        let mut empty = ctx(&c, 0, 0.75, None);
        empty.target_empty = true;
        assert_eq!(reflective_decide(&empty, &cfg), ReflectiveDecision::Abandon);
    }

    #[test]
    fn transitions() {
        use Quadrant::*;
        assert!(transition_permitted(Tac, Exp));
        assert!(transition_permitted(An, Ref));
        assert!(transition_permitted(Ref, An));
        assert!(!transition_permitted(Tac, Ref));
        assert!(!transition_permitted(Exp, Ref));
        assert!(!transition_permitted(An, Tac));
        assert!(!transition_permitted(Ref, Ref));
    }

    #[test]
    fn expectation_without_substitutions_is_one() {
        assert_eq!(expectation_score(&[], 1.0), 1.0);
    }
}
