#include "bihc/service.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>
#include <vector>

// Eigen first: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include "bihc/errors.hpp"
#include "bihc/scene.hpp"

#include <httplib.h>
#include <json.hpp>

namespace bihc {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

enum class State { Precomputing, Ready, Failed };

const char* state_name(State s) {
  switch (s) {
    case State::Precomputing: return "precomputing";
    case State::Ready: return "ready";
    case State::Failed: return "failed";
  }
  return "unknown";
}

struct Session {
  std::string id;
  PreparedCage rest;
  Shape shape;
  DeformationConfig config;
  std::atomic<State> state{State::Precomputing};
  std::atomic<std::size_t> done{0};
  std::atomic<std::size_t> total{0};
  std::atomic<bool> cancelled{false};
  // Written once by the worker before `state` leaves Precomputing.
  std::string error;
  std::shared_ptr<const CoordinateSystem> sys;
  std::shared_ptr<const CoordinateTable> table;
  std::string cache;
  Clock::time_point last_access = Clock::now();  // guarded by the registry mutex
};

struct Worker {
  std::thread thread;
  std::shared_ptr<std::atomic<bool>> finished;
};

std::string new_id() {
  static std::mutex mu;
  static std::random_device rd;
  std::lock_guard<std::mutex> lock(mu);
  std::string id;
  char buf[9];
  for (int i = 0; i < 4; ++i) {
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
    id += buf;
  }
  return id;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

// Maps library exceptions onto response codes.
void send_exception(httplib::Response& res) {
  try {
    throw;
  } catch (const json::exception& e) {
    send_error(res, 400, std::string("malformed request: ") + e.what());
  } catch (const ValidationError& e) {
    send_error(res, 422, e.what());
  } catch (const ContractError& e) {
    send_error(res, 409, e.what());
  } catch (const DomainError& e) {
    send_error(res, 422, e.what());
  } catch (const IoError& e) {
    send_error(res, 422, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

ConfigOverrides overrides_from(const json& c) {
  ConfigOverrides o;
  if (!c.is_object()) return o;
  if (c.contains("order_n")) o.n = c.at("order_n").get<int>();
  if (c.contains("order_k")) o.k = c.at("order_k").get<int>();
  if (c.contains("subdiv")) o.subdiv = c.at("subdiv").get<int>();
  if (c.contains("samples")) o.samples = c.at("samples").get<int>();
  if (c.contains("offset")) o.offset = c.at("offset").get<double>();
  if (c.contains("method")) o.method = c.at("method").get<std::string>();
  return o;
}

json session_json(const Session& s) {
  const State st = s.state.load();
  json j{{"id", s.id},
         {"state", state_name(st)},
         {"done", s.done.load()},
         {"total", s.total.load()},
         {"n", s.config.n},
         {"k", s.config.order_k()},
         {"edge_count", s.rest.cage.size()},
         {"reversed", s.rest.reversed}};
  if (st == State::Failed) j["error"] = s.error;
  if (st == State::Ready) {
    j["rows"] = s.table->size();
    j["exterior"] = s.table->errors.size();
    j["residual"] = s.table->meta.residual;
    j["fallbacks"] = s.table->fallbacks;
  }
  return j;
}

}  // namespace

struct DeformService::Impl {
  ServiceOptions options;
  httplib::Server server;
  int bound_port = 0;
  std::thread listener;

  mutable std::mutex mu;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions;
  std::vector<Worker> workers;

  std::mutex janitor_mu;
  std::condition_variable janitor_cv;
  bool stopping = false;
  std::thread janitor;

  explicit Impl(ServiceOptions o) : options(std::move(o)) { routes(); }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) return nullptr;
    it->second->last_access = Clock::now();
    return it->second;
  }

  void reap_workers() {
    std::lock_guard<std::mutex> lock(mu);
    for (auto it = workers.begin(); it != workers.end();) {
      if (it->finished->load()) {
        it->thread.join();
        it = workers.erase(it);
      } else {
        ++it;
      }
    }
  }

  void launch(const std::shared_ptr<Session>& s) {
    auto finished = std::make_shared<std::atomic<bool>>(false);
    std::thread t([s, finished] {
      try {
        auto sys = std::make_shared<const CoordinateSystem>(build_system(s->rest.cage, s->config));
        s->sys = sys;
        auto table = std::make_shared<const CoordinateTable>(precompute_table(
            *sys, s->shape.vertices, Execution::Parallel,
            [&](std::size_t done, std::size_t total) {
              s->total = total;
              s->done = done;
            },
            &s->cancelled));
        s->cache = serialize_cache(*table);
        s->table = table;
        s->done = table->size();
        s->total = table->size();
        s->state = State::Ready;
      } catch (const std::exception& e) {
        s->error = e.what();
        s->state = State::Failed;
      }
      finished->store(true);
    });
    std::lock_guard<std::mutex> lock(mu);
    workers.push_back({std::move(t), finished});
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    reap_workers();
    auto s = std::make_shared<Session>();
    try {
      const json body = json::parse(req.body);
      const Cage raw = parse_cage(body.at("cage").get<std::string>());
      const ValidationReport report = validate_cage(raw);
      if (!report.valid()) {
        send_json(res, 422, json{{"error", "invalid cage"}, {"report", report.to_string()}});
        return;
      }
      s->rest = prepare_rest_cage(raw);
      s->shape = parse_shape(body.at("shape").get<std::string>());
      s->config = resolve_config(s->rest.cage.order(), overrides_from(body.value("config", json::object())));
    } catch (...) {
      send_exception(res);
      return;
    }
    s->id = new_id();
    s->total = s->shape.vertices.size();
    {
      std::lock_guard<std::mutex> lock(mu);
      sessions.emplace(s->id, s);
    }
    launch(s);
    send_json(res, 201, session_json(*s));
  }

  void deform(Session& s, const httplib::Request& req, httplib::Response& res) {
    try {
      const json body = json::parse(req.body);
      const double w = body.value("w", 1.0);
      if (!(w >= 0.0 && w <= 1.0)) {
        send_error(res, 422, "w must lie in [0, 1]");
        return;
      }
      const ScaleMode mode = parse_scale_mode(body.value("s_mode", std::string("unit")));
      const Cage raw = parse_cage(body.at("target").get<std::string>());
      const TableMeta& meta = s.table->meta;
      const Cage target = prepare_target_cage(raw, s.rest.reversed, meta.n, meta.edge_count);
      const DeformOutcome out = deform_scene(*s.table, target, mode, w, s.sys.get());
      const auto verts = scatter_deformed(s.shape, *s.table, out.points);
      std::string scales;
      for (Eigen::Index i = 0; i < out.scales.size(); ++i) {
        if (i > 0) scales += ",";
        scales += num(out.scales[i]);
      }
      res.set_header("X-Scales", scales);
      res.set_header("X-Energy", num(out.energy));
      res.set_header("X-Unit-Energy", num(out.unit_energy));
      res.set_header("X-Kkt-Residual", num(out.kkt_residual));
      res.set_content(encode_points(verts), "application/octet-stream");
      res.status = 200;
    } catch (...) {
      send_exception(res);
    }
  }

  // Shared guard for endpoints that need a ready table.
  bool ready_or_respond(Session& s, httplib::Response& res) {
    const State st = s.state.load();
    if (st == State::Ready) return true;
    if (st == State::Failed) {
      send_json(res, 409, json{{"error", "precompute failed: " + s.error}});
    } else {
      res.set_header("Retry-After", "1");
      send_json(res, 503, json{{"error", "precompute in progress"}, {"done", s.done.load()}, {"total", s.total.load()}});
    }
    return false;
  }

  void routes() {
    server.set_payload_max_length(256u << 20);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Expose-Headers", "X-Scales, X-Energy, X-Unit-Energy, X-Kkt-Residual, Retry-After"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mu);
      send_json(res, 200, json{{"status", "ok"}, {"sessions", sessions.size()}});
    });
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });
    server.Get(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req.matches[1]);
      if (!s) return send_error(res, 404, "unknown session");
      send_json(res, 200, session_json(*s));
    });
    server.Delete(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mu);
      auto it = sessions.find(req.matches[1]);
      if (it == sessions.end()) return send_error(res, 404, "unknown session");
      it->second->cancelled = true;
      sessions.erase(it);
      res.status = 204;
    });
    server.Get(R"(/sessions/([0-9a-f]+)/table)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req.matches[1]);
      if (!s) return send_error(res, 404, "unknown session");
      if (!ready_or_respond(*s, res)) return;
      res.set_content(s->cache, "application/octet-stream");
      res.status = 200;
    });
    server.Post(R"(/sessions/([0-9a-f]+)/deform)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req.matches[1]);
      if (!s) return send_error(res, 404, "unknown session");
      if (!ready_or_respond(*s, res)) return;
      deform(*s, req, res);
    });
  }

  void start_janitor() {
    janitor = std::thread([this] {
      const auto period = std::max(std::chrono::seconds(1), std::min(options.idle_timeout / 4, std::chrono::seconds(60)));
      std::unique_lock<std::mutex> lock(janitor_mu);
      while (!janitor_cv.wait_for(lock, period, [this] { return stopping; })) {
        lock.unlock();
        expire();
        lock.lock();
      }
    });
  }

  std::size_t expire() {
    const auto now = Clock::now();
    std::lock_guard<std::mutex> lock(mu);
    std::size_t dropped = 0;
    for (auto it = sessions.begin(); it != sessions.end();) {
      const bool idle = now - it->second->last_access > options.idle_timeout;
      if (idle && it->second->state.load() != State::Precomputing) {
        it = sessions.erase(it);
        ++dropped;
      } else {
        ++it;
      }
    }
    return dropped;
  }

  int bind() {
    if (options.port == 0) {
      bound_port = server.bind_to_any_port(options.host);
    } else if (server.bind_to_port(options.host, options.port)) {
      bound_port = options.port;
    } else {
      bound_port = -1;
    }
    if (bound_port <= 0) {
      throw IoError("cannot bind " + options.host + ":" + std::to_string(options.port));
    }
    start_janitor();
    return bound_port;
  }

  void shutdown() {
    server.stop();
    if (listener.joinable()) listener.join();
    {
      std::lock_guard<std::mutex> lock(janitor_mu);
      stopping = true;
    }
    janitor_cv.notify_all();
    if (janitor.joinable()) janitor.join();
    std::vector<Worker> pending;
    {
      std::lock_guard<std::mutex> lock(mu);
      for (auto& [id, s] : sessions) s->cancelled = true;
      pending.swap(workers);
    }
    for (auto& w : pending) w.thread.join();
  }
};

DeformService::DeformService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

DeformService::~DeformService() { impl_->shutdown(); }

int DeformService::start() {
  const int port = impl_->bind();
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void DeformService::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void DeformService::stop() { impl_->shutdown(); }

int DeformService::port() const { return impl_->bound_port; }

std::size_t DeformService::session_count() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->sessions.size();
}

std::size_t DeformService::expire_idle() { return impl_->expire(); }

}  // namespace bihc
