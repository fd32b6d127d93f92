//! In-process transport. Every hand-off is encoded to bytes on send and
//! decoded on receive, exactly as it would cross a wire.

use std::collections::{HashMap, VecDeque};

use super::messages::Message;
use crate::error::{Error, Result};
use crate::wots::KeySequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActorId {
    EndEntity,
    RegistrationAuthority,
    CertificateAuthority,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub from: ActorId,
    pub to: ActorId,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Default)]
pub struct MessageBus {
    queues: HashMap<ActorId, VecDeque<Delivery>>,
    log: Vec<Delivery>,
}

impl MessageBus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, from: ActorId, to: ActorId, msg: &Message) {
        self.send_bytes(from, to, msg.encode());
    }

    pub fn send_bytes(&mut self, from: ActorId, to: ActorId, bytes: Vec<u8>) {
        let d = Delivery { from, to, bytes };
        self.log.push(d.clone());
        self.queues.entry(to).or_default().push_back(d);
    }

    /// Pops the next raw delivery addressed to `to`.
    pub fn receive_bytes(&mut self, to: ActorId) -> Option<Delivery> {
        self.queues.get_mut(&to)?.pop_front()
    }

    pub fn receive(&mut self, to: ActorId) -> Result<(ActorId, Message)> {
        let d = self
            .receive_bytes(to)
            .ok_or_else(|| Error::ProtocolError(format!("no message queued for {to:?}")))?;
        Ok((d.from, Message::decode(&d.bytes)?))
    }

    /// Everything ever delivered, in order.
    pub fn log(&self) -> &[Delivery] {
        &self.log
    }

    pub fn delivered_to(&self, to: ActorId) -> impl Iterator<Item = &Delivery> {
        self.log.iter().filter(move |d| d.to == to)
    }
}

/// Append-only record of every key sequence an actor has seen, by
/// fingerprint.
#[derive(Debug, Clone)]
pub struct ActorTranscript {
    actor: ActorId,
    seen: Vec<[u8; 32]>,
}

impl ActorTranscript {
    pub fn new(actor: ActorId) -> Self {
        Self {
            actor,
            seen: Vec::new(),
        }
    }

    pub fn actor(&self) -> ActorId {
        self.actor
    }

    pub fn observe(&mut self, key: &KeySequence) {
        self.seen.push(key.fingerprint());
    }

    pub fn contains(&self, fingerprint: &[u8; 32]) -> bool {
        self.seen.contains(fingerprint)
    }

    pub fn entries(&self) -> &[[u8; 32]] {
        &self.seen
    }
}
