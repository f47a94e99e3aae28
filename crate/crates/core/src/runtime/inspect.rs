//! Read-only views of architecture metadata, and the audit that checks
//! agent-visible memory never carries it.

use crate::data::{MetaPayload, MetaRecord, MetaSubject, Triple};
use crate::dsl::validate::METADATA_EDGES;
use crate::wm::ElementClass;

use super::Runtime;

/// Findings of [`Runtime::audit`]; empty lists mean the wall holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    /// Working-memory elements whose edge names metadata.
    pub wm_metadata_edges: Vec<Triple>,
    /// Stored chunk slots whose edge names metadata, as `chunk ^edge`.
    pub dm_metadata_edges: Vec<String>,
    /// Elements that break the mode's containment rule.
    pub uncontained: Vec<Triple>,
    /// `^status` elements not owned by the architecture.
    pub forged_status: Vec<Triple>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.wm_metadata_edges.is_empty()
            && self.dm_metadata_edges.is_empty()
            && self.uncontained.is_empty()
            && self.forged_status.is_empty()
    }
}

impl Runtime {
    pub fn audit(&self) -> AuditReport {
        let mut r = AuditReport::default();
        for e in self.wm.elements() {
            if METADATA_EDGES.contains(&e.triple.edge.as_str()) {
                r.wm_metadata_edges.push(e.triple.clone());
            }
            if e.triple.edge.as_str() == "status" && self.wm.class(e.id) != Some(ElementClass::Status) {
                r.forged_status.push(e.triple.clone());
            }
        }
        for c in self.sm.chunks() {
            for (edge, _) in &c.slots {
                if METADATA_EDGES.contains(&edge.as_str()) {
                    r.dm_metadata_edges.push(format!("{} ^{}", c.name, edge));
                }
            }
        }
        r.uncontained = self.wm.audit_containment();
        r
    }

    /// Every piece of metadata the architecture currently keeps.
    pub fn metadata(&self) -> Vec<MetaRecord> {
        let mut out = Vec::new();
        for e in self.wm.elements() {
            let Some(m) = self.wm.meta(e.id) else { continue };
            let at = m.accesses.last().copied().unwrap_or(m.created_at);
            let subject = MetaSubject::Element(e.id);
            out.push(MetaRecord { subject: subject.clone(), payload: MetaPayload::ActivationTrace(m.accesses.clone()), at });
            if let Some(d) = &m.derivation {
                out.push(MetaRecord { subject: subject.clone(), payload: MetaPayload::Derivation(d.clone()), at });
            }
            if let Some(c) = &m.copy_of {
                out.push(MetaRecord { subject: subject.clone(), payload: MetaPayload::CopyOf(c.clone()), at });
            }
        }
        for c in self.sm.chunks() {
            let at = c.accesses.last().copied().unwrap_or(0);
            out.push(MetaRecord {
                subject: MetaSubject::Chunk(c.name.clone()),
                payload: MetaPayload::ActivationTrace(c.accesses.clone()),
                at,
            });
        }
        for ((source, target), hist) in self.sm.associations() {
            let strength = self.sm.association_strength(source, target, self.now, self.config.retrieval.decay);
            out.push(MetaRecord {
                subject: MetaSubject::Chunk(target.clone()),
                payload: MetaPayload::Association { source: source.clone(), target: target.clone(), strength },
                at: hist.last().copied().unwrap_or(0),
            });
        }
        for p in self.pm.iter() {
            let Some(m) = self.pm.meta(&p.name) else { continue };
            out.push(MetaRecord {
                subject: MetaSubject::Production(p.name.clone()),
                payload: MetaPayload::Utility(m.utility),
                at: m.firings.last().copied().unwrap_or(m.created_at),
            });
        }
        out
    }
}
