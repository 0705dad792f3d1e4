use std::fmt;

use super::{EventKind, ProductAgent, ResourceAgent};
use crate::analysis::{InstanceId, Occurrence};
use crate::workflow::Job;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposal {
    pub agent: InstanceId,
    pub earliest_start: u32,
    pub price: i64,
}

/// Tentative reservation of one proposal per demanded unit, all starting
/// together at `start`. The caller confirms or cancels it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Award {
    pub occurrence: Occurrence,
    /// (partner, price) per demanded unit, in resource-type order.
    pub partners: Vec<(InstanceId, i64)>,
    pub start: u32,
    pub end: u32,
}

impl Award {
    pub fn price(&self) -> i64 {
        self.partners.iter().map(|(_, p)| p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    /// Fewer capable working agents than demanded units of some type.
    NoBidder,
    /// Enough capable agents exist, but they are committed elsewhere.
    NoProposal,
    InsufficientFunds,
}

impl Failure {
    /// Failures that cannot resolve later in the run.
    pub fn is_permanent(self) -> bool {
        !matches!(self, Failure::NoProposal)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Failure::NoBidder => "no-bidder",
            Failure::NoProposal => "no-proposal",
            Failure::InsufficientFunds => "insufficient-funds",
        })
    }
}

/// One call for proposals per demanded resource type, sent to every agent
/// of that type. Working capable agents answer with their earliest start and
/// catalog price, unless their recommended queue is headed by another
/// occurrence. Per type the product keeps, in order: recommended partners,
/// earliest finish, lowest price, lowest agent id. The award starts when the
/// last selected partner is free.
///
/// `committed` is what the product already owes for running tasks; the
/// award must fit in the rest of its balance.
pub fn negotiate_job(
    product: &ProductAgent,
    job: &Job,
    occurrence: &Occurrence,
    resources: &[ResourceAgent],
    now: u32,
    committed: i64,
    log: &mut Vec<EventKind>,
) -> Result<Award, Failure> {
    let recommended = product.recommended.get(occurrence);
    let mut partners = Vec::new();
    let mut start = now;
    for (resource, &units) in &job.demand {
        log.push(EventKind::CallForProposals {
            product: product.id.clone(),
            job: job.id.clone(),
            resource: resource.clone(),
        });
        let of_type: Vec<&ResourceAgent> = resources
            .iter()
            .filter(|a| &a.id.resource == resource && a.can_serve(&job.id))
            .collect();
        if of_type.len() < units as usize {
            return Err(Failure::NoBidder);
        }
        let mut proposals: Vec<(bool, u32, i64, InstanceId)> = Vec::new();
        for agent in of_type {
            if agent.queue.front().is_some_and(|head| head != occurrence) {
                continue;
            }
            let Some(t) = agent.free_at(now) else { continue };
            let offer = agent.catalog[&job.id];
            log.push(EventKind::Proposal {
                agent: agent.id.clone(),
                product: product.id.clone(),
                job: job.id.clone(),
                start: t,
                price: offer.price,
            });
            let preferred = recommended.is_some_and(|r| r.contains(&agent.id));
            proposals.push((!preferred, t + offer.duration, offer.price, agent.id.clone()));
        }
        if proposals.len() < units as usize {
            return Err(Failure::NoProposal);
        }
        proposals.sort();
        for (_, finish, price, agent) in proposals.into_iter().take(units as usize) {
            start = start.max(finish - job.duration);
            partners.push((agent, price));
        }
    }
    let award = Award {
        occurrence: occurrence.clone(),
        partners,
        start,
        end: start + job.duration,
    };
    if award.price() > product.balance - committed {
        return Err(Failure::InsufficientFunds);
    }
    Ok(award)
}
