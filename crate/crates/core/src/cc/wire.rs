//! Length-prefixed framing for the interactive protocol and two transports.
//!
//! A frame is a big-endian `u32` length covering the type byte and payload,
//! the type byte, then the payload in canonical encoding.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use super::protocol::{self, CtMessage, Finalized, ImagesMessage, KeysMessage};
use super::{cc_del, cc_vrfy, CcCert, CcCiphertext, CcError, CcParams, CcPublicKey, CcSecretKey, CcVerificationKey};
use crate::codec::{Canonical, CodecError};

pub const MAX_FRAME_LEN: u32 = 1 << 24;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("unknown frame type {0:#04x}")]
    UnknownType(u8),
    #[error("frame length {0} outside 1..={MAX_FRAME_LEN}")]
    BadLength(u32),
    #[error("expected {expected} frame, got {found}")]
    Unexpected {
        expected: &'static str,
        found: &'static str,
    },
    #[error("peer hung up")]
    Closed,
    #[error(transparent)]
    Cc(#[from] CcError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Keys(KeysMessage),
    Images(ImagesMessage),
    CtBundle(CtMessage),
    Abort,
    Cert(CcCert),
    SkReveal(CcSecretKey),
}

impl Frame {
    pub fn type_byte(&self) -> u8 {
        match self {
            Frame::Keys(_) => 0x01,
            Frame::Images(_) => 0x02,
            Frame::CtBundle(_) => 0x03,
            Frame::Abort => 0x04,
            Frame::Cert(_) => 0x05,
            Frame::SkReveal(_) => 0x06,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Frame::Keys(_) => "keys",
            Frame::Images(_) => "images",
            Frame::CtBundle(_) => "ct-bundle",
            Frame::Abort => "abort",
            Frame::Cert(_) => "cert",
            Frame::SkReveal(_) => "sk-reveal",
        }
    }

    fn payload(&self) -> Vec<u8> {
        match self {
            Frame::Keys(m) => m.to_canonical_bytes(),
            Frame::Images(m) => m.to_canonical_bytes(),
            Frame::CtBundle(m) => m.to_canonical_bytes(),
            Frame::Abort => Vec::new(),
            Frame::Cert(m) => m.to_canonical_bytes(),
            Frame::SkReveal(m) => m.to_canonical_bytes(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload();
        let mut out = Vec::with_capacity(5 + payload.len());
        out.extend_from_slice(&(payload.len() as u32 + 1).to_be_bytes());
        out.push(self.type_byte());
        out.extend(payload);
        out
    }

    fn from_parts(ty: u8, payload: &[u8]) -> Result<Self, WireError> {
        Ok(match ty {
            0x01 => Frame::Keys(KeysMessage::from_canonical_bytes(payload)?),
            0x02 => Frame::Images(ImagesMessage::from_canonical_bytes(payload)?),
            0x03 => Frame::CtBundle(CtMessage::from_canonical_bytes(payload)?),
            0x04 if payload.is_empty() => Frame::Abort,
            0x04 => return Err(CodecError::invalid("abort frame carries a payload").into()),
            0x05 => Frame::Cert(CcCert::from_canonical_bytes(payload)?),
            0x06 => Frame::SkReveal(CcSecretKey::from_canonical_bytes(payload)?),
            other => return Err(WireError::UnknownType(other)),
        })
    }
}

pub fn write_frame<W: Write + ?Sized>(w: &mut W, frame: &Frame) -> Result<(), WireError> {
    w.write_all(&frame.to_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_frame<R: Read + ?Sized>(r: &mut R) -> Result<Frame, WireError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Closed,
        _ => e.into(),
    })?;
    let len = u32::from_be_bytes(len);
    if len == 0 || len > MAX_FRAME_LEN {
        return Err(WireError::BadLength(len));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body)?;
    Frame::from_parts(body[0], &body[1..])
}

/// Parses a concatenation of frames, such as a recorded transcript.
pub fn parse_transcript(mut bytes: &[u8]) -> Result<Vec<Frame>, WireError> {
    let mut frames = Vec::new();
    while !bytes.is_empty() {
        frames.push(read_frame(&mut bytes)?);
    }
    Ok(frames)
}

/// A reliable, ordered, bidirectional frame channel.
pub trait FrameChannel {
    fn send(&mut self, frame: &Frame) -> Result<(), WireError>;
    fn recv(&mut self) -> Result<Frame, WireError>;
}

/// Frames over any byte stream.
pub struct StreamChannel<S>(pub S);

impl<S: Read + Write> FrameChannel for StreamChannel<S> {
    fn send(&mut self, frame: &Frame) -> Result<(), WireError> {
        write_frame(&mut self.0, frame)
    }

    fn recv(&mut self) -> Result<Frame, WireError> {
        read_frame(&mut self.0)
    }
}

/// One end of an in-process channel pair carrying encoded frames.
pub struct MemoryChannel {
    tx: mpsc::Sender<Vec<u8>>,
    rx: mpsc::Receiver<Vec<u8>>,
}

pub fn memory_pair() -> (MemoryChannel, MemoryChannel) {
    let (a_tx, b_rx) = mpsc::channel();
    let (b_tx, a_rx) = mpsc::channel();
    (
        MemoryChannel { tx: a_tx, rx: a_rx },
        MemoryChannel { tx: b_tx, rx: b_rx },
    )
}

impl FrameChannel for MemoryChannel {
    fn send(&mut self, frame: &Frame) -> Result<(), WireError> {
        self.tx.send(frame.to_bytes()).map_err(|_| WireError::Closed)
    }

    fn recv(&mut self) -> Result<Frame, WireError> {
        let bytes = self.rx.recv().map_err(|_| WireError::Closed)?;
        read_frame(&mut bytes.as_slice())
    }
}

/// Records every frame passing through, in wire order.
pub struct Recorder<C> {
    inner: C,
    log: Vec<u8>,
}

impl<C: FrameChannel> Recorder<C> {
    pub fn new(inner: C) -> Self {
        Self { inner, log: Vec::new() }
    }

    pub fn into_log(self) -> Vec<u8> {
        self.log
    }
}

impl<C: FrameChannel> FrameChannel for Recorder<C> {
    fn send(&mut self, frame: &Frame) -> Result<(), WireError> {
        self.log.extend(frame.to_bytes());
        self.inner.send(frame)
    }

    fn recv(&mut self) -> Result<Frame, WireError> {
        let frame = self.inner.recv()?;
        self.log.extend(frame.to_bytes());
        Ok(frame)
    }
}

fn unexpected(expected: &'static str, found: &Frame) -> WireError {
    WireError::Unexpected {
        expected,
        found: found.name(),
    }
}

/// Sender-side outcome of a session.
pub struct SenderOutcome {
    /// `None` when the sender aborted.
    pub vk: Option<CcVerificationKey>,
    /// Verdict on the certificate when a deletion round was run.
    pub cert_accepted: Option<bool>,
}

/// Receiver-side outcome of a session.
pub struct ReceiverOutcome {
    /// `None` after an abort, or after the ciphertext was deleted.
    pub ciphertext: Option<CcCiphertext>,
    pub cert: Option<CcCert>,
    pub revealed_sk: Option<CcSecretKey>,
}

/// Runs the sender. With `sk` set, the sender also waits for a deletion
/// certificate and releases `sk` if it verifies.
pub fn run_sender<C: FrameChannel, R: rand::Rng + ?Sized>(
    chan: &mut C,
    pk: &CcPublicKey,
    sk: Option<&CcSecretKey>,
    m: &[bool],
    params: &CcParams,
    rng: &mut R,
) -> Result<SenderOutcome, WireError> {
    let (mut state, keys) = protocol::sender_init(pk, m, params, rng)?;
    chan.send(&Frame::Keys(keys))?;
    let images = match chan.recv()? {
        Frame::Images(images) => images,
        other => return Err(unexpected("images", &other)),
    };
    let vk = match protocol::sender_finalize(&mut state, &images, rng)? {
        Finalized::Sent { vk, ct } => {
            chan.send(&Frame::CtBundle(ct))?;
            vk
        }
        Finalized::Aborted { .. } => {
            chan.send(&Frame::Abort)?;
            return Ok(SenderOutcome {
                vk: None,
                cert_accepted: None,
            });
        }
    };
    let Some(sk) = sk else {
        return Ok(SenderOutcome {
            vk: Some(vk),
            cert_accepted: None,
        });
    };
    let cert = match chan.recv()? {
        Frame::Cert(cert) => cert,
        other => return Err(unexpected("cert", &other)),
    };
    let accepted = cc_vrfy(&vk, &cert).unwrap_or(false);
    chan.send(&if accepted {
        Frame::SkReveal(sk.clone())
    } else {
        Frame::Abort
    })?;
    Ok(SenderOutcome {
        vk: Some(vk),
        cert_accepted: Some(accepted),
    })
}

/// Runs an honest receiver. With `delete` set, it deletes right away and
/// sends the certificate.
pub fn run_receiver<C: FrameChannel, R: rand::Rng + ?Sized>(
    chan: &mut C,
    delete: bool,
    rng: &mut R,
) -> Result<ReceiverOutcome, WireError> {
    let keys = match chan.recv()? {
        Frame::Keys(keys) => keys,
        other => return Err(unexpected("keys", &other)),
    };
    let (state, images) = protocol::receiver_respond(&keys, rng)?;
    chan.send(&Frame::Images(images))?;
    let ct = match chan.recv()? {
        Frame::CtBundle(ct) => protocol::receiver_complete(state, ct)?,
        // abort: the receiver drops everything it holds
        Frame::Abort => {
            return Ok(ReceiverOutcome {
                ciphertext: None,
                cert: None,
                revealed_sk: None,
            })
        }
        other => return Err(unexpected("ct-bundle", &other)),
    };
    if !delete {
        return Ok(ReceiverOutcome {
            ciphertext: Some(ct),
            cert: None,
            revealed_sk: None,
        });
    }
    let cert = cc_del(ct, rng)?;
    chan.send(&Frame::Cert(cert.clone()))?;
    let revealed_sk = match chan.recv()? {
        Frame::SkReveal(sk) => Some(sk),
        Frame::Abort => None,
        other => return Err(unexpected("sk-reveal", &other)),
    };
    Ok(ReceiverOutcome {
        ciphertext: None,
        cert: Some(cert),
        revealed_sk,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transport {
    InProcess,
    /// A TCP connection on 127.0.0.1.
    Loopback,
}

pub struct Session {
    pub sender: SenderOutcome,
    pub receiver: ReceiverOutcome,
    /// Every frame in wire order.
    pub transcript: Vec<u8>,
}

/// Per-party generators derived from one seed: stream 0 for the sender,
/// stream 1 for the receiver.
pub fn party_rngs(seed: u64) -> (ChaCha20Rng, ChaCha20Rng) {
    let mut s = ChaCha20Rng::seed_from_u64(seed);
    s.set_stream(0);
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(1);
    (s, r)
}

/// Runs both parties on separate threads over the chosen transport.
pub fn run_session(
    pk: &CcPublicKey,
    sk: Option<&CcSecretKey>,
    m: &[bool],
    params: &CcParams,
    seed: u64,
    transport: Transport,
) -> Result<Session, WireError> {
    let (mut sender_rng, mut receiver_rng) = party_rngs(seed);
    let delete = sk.is_some();
    std::thread::scope(|scope| {
        let (sender, receiver) = match transport {
            Transport::InProcess => {
                let (a, b) = memory_pair();
                let receiver = scope.spawn(move || run_receiver(&mut { b }, delete, &mut receiver_rng));
                let mut chan = Recorder::new(a);
                let sender = run_sender(&mut chan, pk, sk, m, params, &mut sender_rng);
                (sender.map(|s| (s, chan.into_log())), receiver.join())
            }
            Transport::Loopback => {
                let listener = TcpListener::bind("127.0.0.1:0")?;
                let addr = listener.local_addr()?;
                let receiver = scope.spawn(move || {
                    let stream = TcpStream::connect(addr)?;
                    stream.set_nodelay(true)?;
                    run_receiver(&mut StreamChannel(stream), delete, &mut receiver_rng)
                });
                let (stream, _) = listener.accept()?;
                stream.set_nodelay(true)?;
                let mut chan = Recorder::new(StreamChannel(stream));
                let sender = run_sender(&mut chan, pk, sk, m, params, &mut sender_rng);
                (sender.map(|s| (s, chan.into_log())), receiver.join())
            }
        };
        let receiver = receiver.map_err(|_| WireError::Closed)??;
        let (sender, transcript) = sender?;
        Ok(Session {
            sender,
            receiver,
            transcript,
        })
    })
}
