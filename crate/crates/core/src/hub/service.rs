//! The hub's streaming service: spaces catalogue, per-view sample streams,
//! fall events, rate control, and the provenance-bearing admin registry.
//!
//! Stream fan-out keeps one line log per registered view. A subscriber
//! first replays the log, then follows live pushes through its own bounded
//! buffer; if the buffer overflows the subscription is closed with a
//! terminal error record. The run itself never waits for a consumer.

use std::io::BufReader;
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use crossbeam_channel::{bounded, Receiver, Sender, TrySendError};

use crate::falls::FallAlarm;
use crate::kernel::{CommandEnvelope, RateCommand, RunSummary, SensorDescriptor};
use crate::spaces::types::{NormalizedSample, PayloadKind};
use crate::spaces::wire::sample_to_wire_json;
use crate::spaces::{apply_view, SpaceRegistry};

use super::http::{error_body, read_request, write_json, ChunkedWriter, Request};

#[derive(Debug, Clone)]
pub struct HubConfig {
    /// Live-tail buffer per subscriber, in lines.
    pub subscriber_buffer: usize,
}

impl Default for HubConfig {
    fn default() -> Self {
        Self { subscriber_buffer: 1_024 }
    }
}

/// One registered consumer of a view stream.
#[derive(Debug, Clone)]
pub struct Subscription {
    pub subscription_id: u64,
    pub view_id: String,
    pub filter: Option<PayloadKind>,
    pub started_at_tick: u64,
}

enum StreamMsg {
    Line(Arc<str>),
    Complete(Arc<str>),
}

struct SubSlot {
    view_id: String,
    filter: Option<PayloadKind>,
    tx: Sender<StreamMsg>,
    overflowed: Arc<AtomicBool>,
}

struct LogEntry {
    kind: PayloadKind,
    line: Arc<str>,
}

#[derive(Default)]
struct HubState {
    view_logs: std::collections::BTreeMap<String, Vec<LogEntry>>,
    summary_line: Option<Arc<str>>,
    alarms: Vec<(f64, Arc<str>)>,
    subs: Vec<SubSlot>,
    finished: bool,
}

/// Shared service state. The pipeline ingests; connection handlers read.
pub struct Hub {
    spaces: Arc<SpaceRegistry>,
    descriptors: Vec<SensorDescriptor>,
    tick_quantum_us: u32,
    current_tick: AtomicU64,
    rate_tx: Mutex<Option<Sender<CommandEnvelope>>>,
    state: Mutex<HubState>,
    progress: Condvar,
    config: HubConfig,
    next_subscription_id: AtomicU64,
}

impl Hub {
    pub fn new(
        spaces: Arc<SpaceRegistry>,
        descriptors: Vec<SensorDescriptor>,
        tick_quantum_us: u32,
        rate_tx: Option<Sender<CommandEnvelope>>,
        config: HubConfig,
    ) -> Arc<Self> {
        let mut state = HubState::default();
        for view in spaces.views() {
            state.view_logs.insert(view.view_id.clone(), Vec::new());
        }
        Arc::new(Self {
            spaces,
            descriptors,
            tick_quantum_us,
            current_tick: AtomicU64::new(0),
            rate_tx: Mutex::new(rate_tx),
            state: Mutex::new(state),
            progress: Condvar::new(),
            config,
            next_subscription_id: AtomicU64::new(1),
        })
    }

    pub fn spaces(&self) -> &SpaceRegistry {
        &self.spaces
    }

    /// Ingest one native normalized sample: project it through every
    /// registered view, append to the per-view logs, and fan out to live
    /// subscribers. A view that cannot express the sample skips it.
    pub fn ingest_sample(&self, tick: u64, sample: &NormalizedSample) {
        self.current_tick.store(tick, Ordering::Relaxed);
        let mut projected: Vec<(String, LogEntry)> = Vec::with_capacity(self.spaces.views().len());
        for view in self.spaces.views() {
            match apply_view(sample, view, &self.spaces) {
                Ok(viewed) => projected.push((
                    view.view_id.clone(),
                    LogEntry {
                        kind: viewed.payload.value.kind(),
                        line: sample_to_wire_json(&viewed).into(),
                    },
                )),
                Err(err) => {
                    log::debug!("view {} skips a sample: {err}", view.view_id);
                }
            }
        }

        let mut state = self.state.lock().expect("hub state lock");
        for (view_id, entry) in projected {
            let kind = entry.kind;
            let line = Arc::clone(&entry.line);
            state.view_logs.get_mut(&view_id).expect("view log exists").push(entry);
            Self::fan_out(&mut state.subs, &view_id, kind, &line);
        }
        drop(state);
        self.progress.notify_all();
    }

    /// Mark the run finished: record the summary and alarms, push the
    /// terminal summary record to every live subscriber, and drop the rate
    /// command channel so further rate posts answer "run finished".
    pub fn complete(&self, summary: &RunSummary, alarms: &[FallAlarm]) {
        let summary_line: Arc<str> = summary.to_wire_json().into();
        let mut state = self.state.lock().expect("hub state lock");
        state.summary_line = Some(Arc::clone(&summary_line));
        state.alarms = alarms.iter().map(|a| (a.t_s, Arc::from(a.to_wire_json()))).collect();
        state.finished = true;
        let mut subs = std::mem::take(&mut state.subs);
        for sub in &mut subs {
            let _ = sub.tx.try_send(StreamMsg::Complete(Arc::clone(&summary_line)));
        }
        drop(state);
        *self.rate_tx.lock().expect("rate channel lock") = None;
        self.progress.notify_all();
    }

    fn fan_out(subs: &mut Vec<SubSlot>, view_id: &str, kind: PayloadKind, line: &Arc<str>) {
        let mut i = 0;
        while i < subs.len() {
            let slot = &subs[i];
            let matches = slot.view_id == view_id && slot.filter.map(|f| f == kind).unwrap_or(true);
            if !matches {
                i += 1;
                continue;
            }
            match slot.tx.try_send(StreamMsg::Line(Arc::clone(line))) {
                Ok(()) => i += 1,
                Err(TrySendError::Full(_)) => {
                    slot.overflowed.store(true, Ordering::Relaxed);
                    subs.swap_remove(i);
                }
                Err(TrySendError::Disconnected(_)) => {
                    subs.swap_remove(i);
                }
            }
        }
    }

    fn subscribe(
        &self,
        view_id: &str,
        filter: Option<PayloadKind>,
    ) -> Option<(Subscription, Vec<Arc<str>>, Option<Receiver<StreamMsg>>, Option<Arc<str>>, Arc<AtomicBool>)> {
        self.spaces.view(view_id)?;
        let subscription = Subscription {
            subscription_id: self.next_subscription_id.fetch_add(1, Ordering::Relaxed),
            view_id: view_id.to_string(),
            filter,
            started_at_tick: self.current_tick.load(Ordering::Relaxed),
        };
        let mut state = self.state.lock().expect("hub state lock");
        let replay: Vec<Arc<str>> = state.view_logs[view_id]
            .iter()
            .filter(|e| filter.map(|f| f == e.kind).unwrap_or(true))
            .map(|e| Arc::clone(&e.line))
            .collect();
        let overflowed = Arc::new(AtomicBool::new(false));
        if state.finished {
            let summary = state.summary_line.clone();
            return Some((subscription, replay, None, summary, overflowed));
        }
        let (tx, rx) = bounded(self.config.subscriber_buffer);
        state.subs.push(SubSlot {
            view_id: view_id.to_string(),
            filter,
            tx,
            overflowed: Arc::clone(&overflowed),
        });
        Some((subscription, replay, Some(rx), None, overflowed))
    }

    /// Alarm records at or after `since_t_s`, in time order.
    pub fn events_since(&self, since_t_s: f64) -> Vec<Arc<str>> {
        let state = self.state.lock().expect("hub state lock");
        state
            .alarms
            .iter()
            .filter(|(t, _)| *t >= since_t_s)
            .map(|(_, line)| Arc::clone(line))
            .collect()
    }

    pub fn run_finished(&self) -> bool {
        self.state.lock().expect("hub state lock").finished
    }

    // -----------------------------------------------------------------
    // HTTP surface
    // -----------------------------------------------------------------

    pub fn handle_connection(self: &Arc<Self>, stream: TcpStream) {
        let peer_reader = match stream.try_clone() {
            Ok(s) => s,
            Err(_) => return,
        };
        let mut reader = BufReader::new(peer_reader);
        let mut writer = stream;
        let request = match read_request(&mut reader) {
            Ok(Some(r)) => r,
            Ok(None) => return,
            Err(err) => {
                let _ = write_json(&mut writer, 400, &error_body("malformed_request", &err.to_string()));
                return;
            }
        };
        if let Err(err) = self.route(&request, &mut writer) {
            log::debug!("connection dropped: {err}");
        }
    }

    fn route(self: &Arc<Self>, request: &Request, w: &mut TcpStream) -> std::io::Result<()> {
        match (request.method.as_str(), request.path.as_str()) {
            ("GET", "/v1/health") => write_json(w, 200, r#"{"status":"ok"}"#),
            ("GET", "/v1/spaces") => {
                let body = serde_json::to_string(self.spaces.spaces()).expect("spaces serialize");
                write_json(w, 200, &body)
            }
            ("GET", "/v1/admin/sensors") => {
                let body = serde_json::to_string(&self.descriptors).expect("descriptors serialize");
                write_json(w, 200, &body)
            }
            ("GET", "/v1/events") => self.handle_events(request, w),
            ("GET", "/v1/stream") => self.handle_stream(request, w),
            ("POST", path) => match path.strip_prefix("/v1/sensors/").and_then(|p| p.strip_suffix("/rate")) {
                Some(sensor_id) if !sensor_id.contains('/') => self.handle_rate(sensor_id, request, w),
                _ => write_json(w, 404, &error_body("not_found", path)),
            },
            (_, path) => write_json(w, 404, &error_body("not_found", path)),
        }
    }

    fn handle_events(&self, request: &Request, w: &mut TcpStream) -> std::io::Result<()> {
        let since = match request.query.get("since") {
            None => 0.0,
            Some(raw) => match raw.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => v,
                _ => {
                    return write_json(
                        w,
                        400,
                        &error_body("malformed_query", "since must be a non-negative number"),
                    )
                }
            },
        };
        let lines = self.events_since(since);
        let mut body = String::from("[");
        for (i, line) in lines.iter().enumerate() {
            if i > 0 {
                body.push(',');
            }
            body.push_str(line);
        }
        body.push(']');
        write_json(w, 200, &body)
    }

    fn handle_stream(self: &Arc<Self>, request: &Request, w: &mut TcpStream) -> std::io::Result<()> {
        let view_id = match request.query.get("view") {
            Some(v) => v.as_str(),
            None => return write_json(w, 400, &error_body("missing_view", "use ?view=ID")),
        };
        let filter = match request.query.get("kind") {
            None => None,
            Some(raw) => match PayloadKind::parse(raw) {
                Some(k) => Some(k),
                None => {
                    return write_json(w, 400, &error_body("unknown_kind", raw));
                }
            },
        };
        let Some((subscription, replay, live, summary_now, overflowed)) = self.subscribe(view_id, filter) else {
            return write_json(w, 404, &error_body("unknown_view", view_id));
        };
        log::debug!(
            "subscription {} on view {} from tick {}",
            subscription.subscription_id,
            subscription.view_id,
            subscription.started_at_tick
        );

        let mut chunked = ChunkedWriter::start(&mut *w, 200)?;
        for line in replay {
            chunked.write_line(&line)?;
        }
        match (live, summary_now) {
            (Some(rx), _) => loop {
                match rx.recv() {
                    Ok(StreamMsg::Line(line)) => chunked.write_line(&line)?,
                    Ok(StreamMsg::Complete(summary)) => {
                        chunked.write_line(&summary)?;
                        break;
                    }
                    Err(_) => {
                        if overflowed.load(Ordering::Relaxed) {
                            chunked.write_line(&error_body(
                                "subscriber_overflow",
                                "consumer fell behind the per-subscriber buffer; subscription closed",
                            ))?;
                        }
                        break;
                    }
                }
            },
            (None, Some(summary)) => chunked.write_line(&summary)?,
            (None, None) => {}
        }
        chunked.finish()
    }

    fn handle_rate(&self, sensor_id: &str, request: &Request, w: &mut TcpStream) -> std::io::Result<()> {
        #[derive(serde::Deserialize)]
        struct RateBody {
            rate_hz: f64,
        }
        #[derive(serde::Serialize)]
        struct WireAck {
            applied_period_ticks: u32,
            effective_from_tick: u64,
        }

        let body: RateBody = match serde_json::from_slice(&request.body) {
            Ok(b) => b,
            Err(err) => return write_json(w, 400, &error_body("malformed_body", &err.to_string())),
        };
        let Some(descriptor) = self.descriptors.iter().find(|d| d.sensor_id == sensor_id) else {
            return write_json(w, 404, &error_body("unknown_sensor", sensor_id));
        };
        if !(body.rate_hz > 0.0) || !body.rate_hz.is_finite() {
            return write_json(w, 422, &error_body("non_integral_period", "rate must be a positive number"));
        }
        let period_exact = 1e6 / (body.rate_hz * self.tick_quantum_us as f64);
        let period_rounded = period_exact.round();
        if (period_exact - period_rounded).abs() > 1e-9 * period_exact.max(1.0) || period_rounded < 1.0 {
            return write_json(
                w,
                422,
                &error_body(
                    "non_integral_period",
                    &format!("{} Hz at {} µs per tick is {period_exact} ticks", body.rate_hz, self.tick_quantum_us),
                ),
            );
        }
        let period = period_rounded as u32;
        if period < descriptor.min_period_ticks || period > descriptor.max_period_ticks {
            return write_json(
                w,
                422,
                &error_body(
                    "period_out_of_bounds",
                    &format!(
                        "period {period} outside [{}, {}]",
                        descriptor.min_period_ticks, descriptor.max_period_ticks
                    ),
                ),
            );
        }

        let envelope_tx = self.rate_tx.lock().expect("rate channel lock").clone();
        let Some(tx) = envelope_tx else {
            return write_json(w, 409, &error_body("run_finished", "the run is over; rate commands no longer apply"));
        };
        let (reply_tx, reply_rx) = bounded(1);
        let envelope = CommandEnvelope {
            command: RateCommand {
                sensor_id: sensor_id.to_string(),
                new_period_ticks: period,
                issued_at_tick: self.current_tick.load(Ordering::Relaxed),
            },
            reply: Some(reply_tx),
        };
        if tx.send(envelope).is_err() {
            return write_json(w, 409, &error_body("run_finished", "the run is over; rate commands no longer apply"));
        }
        match reply_rx.recv_timeout(Duration::from_secs(10)) {
            Ok(Ok(ack)) => {
                let body = serde_json::to_string(&WireAck {
                    applied_period_ticks: ack.applied_period_ticks,
                    effective_from_tick: ack.effective_from_tick,
                })
                .expect("ack serializes");
                write_json(w, 202, &body)
            }
            Ok(Err(err)) => write_json(w, 422, &error_body("period_out_of_bounds", &err.to_string())),
            Err(_) => write_json(w, 503, &error_body("kernel_timeout", "no boundary reached the command in time")),
        }
    }
}

/// Accept connections forever, one handler thread per connection.
pub fn serve_forever(hub: Arc<Hub>, listener: TcpListener) {
    for stream in listener.incoming() {
        match stream {
            Ok(stream) => {
                let hub = Arc::clone(&hub);
                std::thread::spawn(move || hub.handle_connection(stream));
            }
            Err(err) => {
                log::warn!("accept failed: {err}");
            }
        }
    }
}
