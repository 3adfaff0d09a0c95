#pragma once

#include <algorithm>
#include <any>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "qmat/errors.hpp"
#include "qmat/executor.hpp"

// Deterministic parallel execution of recursion DAGs. Two scheduling modes:
//
//   shared_queue   -- one central ready queue; a worker blocked on a join
//                     helps by draining pending tasks.
//
//   multidispatch  -- every worker that receives a subtask also receives a
//                     list of slave workers. Forking hands child subtasks to
//                     slaves together with a share of the remaining list;
//                     a slave that finishes returns itself (and the slaves
//                     it accumulated) to its master's list. Distributed
//                     memory is simulated: tasks only see immutable inputs
//                     and write caller-owned result slots.
//
// Results are bit-identical across modes and worker counts because every
// task is a pure function over exact values.

namespace qmat {

enum class sched_mode { shared_queue, multidispatch };

struct topology {
    int workers = 1;
    sched_mode mode = sched_mode::multidispatch;
    bool audit = false;              // enable slave-list bookkeeping checks
    std::int64_t spawn_cutoff = 256;
};

class task_engine : public executor {
public:
    explicit task_engine(topology topo) : topo_(topo) {
        if (topo_.workers < 1) throw invalid_spec("worker count must be positive");
        spawn_cutoff = topo_.spawn_cutoff;
        if (topo_.workers == 1) return;   // degenerate: run everything inline
        if (topo_.mode == sched_mode::multidispatch) {
            states_ = std::vector<worker_state>(static_cast<std::size_t>(topo_.workers));
            owner_.assign(static_cast<std::size_t>(topo_.workers), owner_free);
            for (int w = 0; w < topo_.workers; ++w)
                threads_.emplace_back([this, w] { dispatch_loop(w); });
        } else {
            // the calling thread participates, so spawn one fewer
            for (int w = 0; w < topo_.workers - 1; ++w)
                threads_.emplace_back([this] { queue_loop(); });
        }
    }

    ~task_engine() override {
        if (topo_.mode == sched_mode::multidispatch) {
            for (auto& st : states_) {
                std::lock_guard lk(st.m);
                st.stop = true;
                st.cv.notify_all();
            }
        } else {
            std::lock_guard lk(qm_);
            stop_ = true;
            qcv_.notify_all();
        }
        for (auto& t : threads_) t.join();
    }

    task_engine(const task_engine&) = delete;
    task_engine& operator=(const task_engine&) = delete;

    int worker_count() const noexcept override { return topo_.workers; }
    sched_mode mode() const noexcept { return topo_.mode; }

    /// Top-level entry: runs `root` to completion using the whole pool.
    /// In multidispatch mode the root task lands on worker 0 with every
    /// other worker as its slave.
    void run(std::function<void()> root) {
        if (topo_.workers == 1) {
            root();
            return;
        }
        std::lock_guard run_lock(run_m_);
        if (topo_.mode == sched_mode::shared_queue) {
            root();   // calling thread is one of the n computing contexts
            return;
        }
        join_frame frame;
        frame.pending = 1;
        assignment a;
        a.work = std::move(root);
        a.master = -1;
        a.frame = &frame;
        for (int w = 1; w < topo_.workers; ++w) a.share.push_back(w);
        if (topo_.audit) audit_dispatch(-1, 0, a.share);
        post(0, std::move(a));
        frame.wait();
        if (topo_.audit) audit_all_free();
    }

    template <typename F>
    auto run_value(F&& f) -> decltype(f()) {
        using T = decltype(f());
        std::optional<T> slot;
        run([&] { slot.emplace(f()); });
        return std::move(*slot);
    }

    void invoke(std::span<std::function<void()>> tasks) override {
        if (tasks.empty()) return;
        if (topo_.workers == 1 || tasks.size() == 1) {
            for (auto& t : tasks) t();
            return;
        }
        if (topo_.mode == sched_mode::shared_queue) {
            invoke_shared(tasks);
        } else {
            if (tl_worker_of == this) {
                invoke_dispatch(tl_worker_id, tasks);
            } else {
                // not a pool thread: enter the pool first
                run([&] { invoke(tasks); });
            }
        }
    }

private:
    struct join_frame {
        std::mutex m;
        std::condition_variable cv;
        int pending = 0;
        std::exception_ptr error;

        void arrive(std::exception_ptr e) {
            std::lock_guard lk(m);
            if (e && !error) error = e;
            if (--pending == 0) cv.notify_all();
        }
        void wait() {
            std::unique_lock lk(m);
            cv.wait(lk, [&] { return pending == 0; });
        }
        void rethrow() {
            if (error) std::rethrow_exception(error);
        }
    };

    struct assignment {
        std::function<void()> work;
        std::function<void()>* work_ref = nullptr;   // used when the closure outlives us
        std::vector<int> share;
        int master = -1;
        join_frame* frame = nullptr;
    };

    struct worker_state {
        std::mutex m;
        std::condition_variable cv;
        std::deque<assignment> mail;
        std::vector<int> slaves;
        bool stop = false;

    };

    // --- multidispatch -----------------------------------------------------

    void post(int w, assignment a) {
        auto& st = states_[static_cast<std::size_t>(w)];
        std::lock_guard lk(st.m);
        st.mail.push_back(std::move(a));
        st.cv.notify_one();
    }

    void dispatch_loop(int me) {
        auto& st = states_[static_cast<std::size_t>(me)];
        for (;;) {
            assignment a;
            {
                std::unique_lock lk(st.m);
                st.cv.wait(lk, [&] { return st.stop || !st.mail.empty(); });
                if (st.stop && st.mail.empty()) return;
                a = std::move(st.mail.front());
                st.mail.pop_front();
                st.slaves = std::move(a.share);
            }
            tl_worker_of = this;
            tl_worker_id = me;
            std::exception_ptr err;
            try {
                if (a.work_ref) (*a.work_ref)();
                else a.work();
            } catch (...) {
                err = std::current_exception();
            }
            tl_worker_of = nullptr;
            tl_worker_id = -1;
            // return self plus accumulated slaves to the master's pool
            std::vector<int> returning;
            {
                std::lock_guard lk(st.m);
                st.slaves.swap(returning);
            }
            returning.push_back(me);
            if (topo_.audit) audit_return(me, a.master, returning);
            if (a.master >= 0) {
                auto& ms = states_[static_cast<std::size_t>(a.master)];
                std::lock_guard lk(ms.m);
                ms.slaves.insert(ms.slaves.end(), returning.begin(), returning.end());
            }
            a.frame->arrive(err);
        }
    }

    void invoke_dispatch(int me, std::span<std::function<void()>> tasks) {
        auto& st = states_[static_cast<std::size_t>(me)];
        std::vector<int> avail;
        {
            std::lock_guard lk(st.m);
            avail.swap(st.slaves);
        }
        const std::size_t k = tasks.size();
        const std::size_t m = std::min(k - 1, avail.size());
        if (m == 0) {
            {
                std::lock_guard lk(st.m);
                st.slaves = std::move(avail);
            }
            for (auto& t : tasks) t();
            return;
        }
        // executors take tasks[1..m]; leftover slaves become their shares
        std::vector<std::vector<int>> share(m);
        for (std::size_t i = m; i < avail.size(); ++i)
            share[(i - m) % m].push_back(avail[i]);
        join_frame frame;
        frame.pending = static_cast<int>(m);
        for (std::size_t i = 0; i < m; ++i) {
            assignment a;
            a.work_ref = &tasks[1 + i];
            a.share = std::move(share[i]);
            a.master = me;
            a.frame = &frame;
            if (topo_.audit) audit_dispatch(me, avail[i], a.share);
            post(avail[i], std::move(a));
        }
        std::exception_ptr inline_err;
        try {
            tasks[0]();
            for (std::size_t i = 1 + m; i < k; ++i) tasks[i]();
        } catch (...) {
            inline_err = std::current_exception();
        }
        frame.wait();   // slaves (and their shares) are back on our list now
        frame.rethrow();
        if (inline_err) std::rethrow_exception(inline_err);
    }

    // --- shared queue -------------------------------------------------------

    struct queue_item {
        std::function<void()>* task;
        join_frame* frame;
    };

    void run_item(const queue_item& it) {
        std::exception_ptr err;
        try {
            (*it.task)();
        } catch (...) {
            err = std::current_exception();
        }
        it.frame->arrive(err);
    }

    void queue_loop() {
        for (;;) {
            queue_item it{};
            {
                std::unique_lock lk(qm_);
                qcv_.wait(lk, [&] { return stop_ || !queue_.empty(); });
                if (stop_ && queue_.empty()) return;
                it = queue_.front();
                queue_.pop_front();
            }
            run_item(it);
        }
    }

    void invoke_shared(std::span<std::function<void()>> tasks) {
        join_frame frame;
        frame.pending = static_cast<int>(tasks.size()) - 1;
        {
            std::lock_guard lk(qm_);
            for (std::size_t i = 1; i < tasks.size(); ++i)
                queue_.push_back({&tasks[i], &frame});
            qcv_.notify_all();
        }
        std::exception_ptr inline_err;
        try {
            tasks[0]();
        } catch (...) {
            inline_err = std::current_exception();
        }
        // help with whatever is pending while our children finish elsewhere
        for (;;) {
            {
                std::lock_guard lk(frame.m);
                if (frame.pending == 0) break;
            }
            queue_item it{};
            bool got = false;
            {
                std::lock_guard lk(qm_);
                if (!queue_.empty()) {
                    it = queue_.front();
                    queue_.pop_front();
                    got = true;
                }
            }
            if (got) {
                run_item(it);
            } else {
                std::unique_lock lk(frame.m);
                frame.cv.wait(lk, [&] { return frame.pending == 0; });
                break;
            }
        }
        frame.rethrow();
        if (inline_err) std::rethrow_exception(inline_err);
    }

    // --- slave-list bookkeeping (instrumented builds) ------------------------

    static constexpr int owner_free = -2;
    static constexpr int owner_busy = -3;

    void audit_dispatch(int master, int target, const std::vector<int>& share) {
        std::lock_guard lk(audit_m_);
        const int expected = master < 0 ? owner_free : master;
        audit_move(target, expected, owner_busy);
        for (int s : share) audit_move(s, expected, target);
        audit_partition();
    }

    void audit_return(int worker, int master, const std::vector<int>& returning) {
        std::lock_guard lk(audit_m_);
        const int to = master < 0 ? owner_free : master;
        for (int s : returning)
            audit_move(s, s == worker ? owner_busy : worker, to);
        audit_partition();
    }

    void audit_move(int w, int from, int to) {
        auto& o = owner_[static_cast<std::size_t>(w)];
        if (o != from)
            throw worker_panic("slave-list bookkeeping violated for worker " +
                               std::to_string(w));
        o = to;
    }

    void audit_partition() {
        // owner_ maps every worker to exactly one of {free, busy, owner id};
        // an owner must itself be busy, otherwise a list leaked.
        for (std::size_t w = 0; w < owner_.size(); ++w)
            if (owner_[w] >= 0 && owner_[static_cast<std::size_t>(owner_[w])] != owner_busy)
                throw worker_panic("slave list owned by an idle worker");
    }

    void audit_all_free() {
        std::lock_guard lk(audit_m_);
        for (std::size_t w = 0; w < owner_.size(); ++w)
            if (owner_[w] != owner_free)
                throw worker_panic("worker " + std::to_string(w) +
                                   " not returned to the free pool");
    }

    topology topo_;
    std::vector<std::thread> threads_;
    std::mutex run_m_;

    std::vector<worker_state> states_;   // multidispatch
    std::mutex audit_m_;
    std::vector<int> owner_;

    std::mutex qm_;                      // shared queue
    std::condition_variable qcv_;
    std::deque<queue_item> queue_;
    bool stop_ = false;

    static thread_local task_engine* tl_worker_of;
    static thread_local int tl_worker_id;
};

inline thread_local task_engine* task_engine::tl_worker_of = nullptr;
inline thread_local int task_engine::tl_worker_id = -1;

// ---------------------------------------------------------------------------
// explicit dependency graphs
// ---------------------------------------------------------------------------

/// Recursion DAG with one producer per value. Nodes carry type-erased
/// closures; execution order is any topological order, and replaying the
/// graph serially gives bit-identical outputs to any parallel schedule.
class task_graph {
public:
    using node_id = std::size_t;
    using node_fn = std::function<std::any(std::span<const std::any>)>;

    node_id add_node(std::string name, std::vector<node_id> deps, node_fn fn) {
        nodes_.push_back({std::move(name), std::move(deps), std::move(fn)});
        return nodes_.size() - 1;
    }

    std::size_t size() const { return nodes_.size(); }
    const std::string& name(node_id id) const { return nodes_[id].name; }
    const std::vector<node_id>& deps(node_id id) const { return nodes_[id].deps; }

    /// Kahn topological order; throws cycle_detected when no such order
    /// exists. Ready ties resolve by node id to keep schedules reproducible.
    std::vector<node_id> topological_order() const {
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (node_id d : nodes_[i].deps)
                if (d >= nodes_.size())
                    throw invalid_spec("dependency on unknown node " + std::to_string(d));
        std::vector<std::size_t> indeg(nodes_.size(), 0);
        for (std::size_t i = 0; i < nodes_.size(); ++i) indeg[i] = nodes_[i].deps.size();
        std::vector<node_id> ready, order;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (indeg[i] == 0) ready.push_back(i);
        std::vector<std::vector<node_id>> consumers(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (node_id d : nodes_[i].deps) consumers[d].push_back(i);
        while (!ready.empty()) {
            std::sort(ready.begin(), ready.end());
            node_id id = ready.front();
            ready.erase(ready.begin());
            order.push_back(id);
            for (node_id c : consumers[id])
                if (--indeg[c] == 0) ready.push_back(c);
        }
        if (order.size() != nodes_.size())
            throw cycle_detected("task graph contains a dependency cycle");
        return order;
    }

    std::any run_node(node_id id, std::span<const std::any> inputs) const {
        return nodes_[id].fn(inputs);
    }

private:
    struct node {
        std::string name;
        std::vector<node_id> deps;
        node_fn fn;
    };
    std::vector<node> nodes_;
};

/// Executes a DAG wave by wave: each wave is the ready frontier in node-id
/// order, fanned out through the executor. A node failure surfaces as
/// worker_panic naming the node.
inline std::vector<std::any> execute_graph(const task_graph& g, executor& ex) {
    (void)g.topological_order();   // validates ids and acyclicity
    const std::size_t n = g.size();
    std::vector<std::any> results(n);
    std::vector<std::size_t> indeg(n);
    std::vector<std::vector<task_graph::node_id>> consumers(n);
    for (std::size_t i = 0; i < n; ++i) {
        indeg[i] = g.deps(i).size();
        for (auto d : g.deps(i)) consumers[d].push_back(i);
    }
    std::vector<task_graph::node_id> wave;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) wave.push_back(i);

    std::mutex err_m;
    std::optional<task_graph::node_id> failed;
    std::string failure_msg;

    while (!wave.empty()) {
        std::sort(wave.begin(), wave.end());
        std::vector<std::function<void()>> tasks;
        tasks.reserve(wave.size());
        for (auto id : wave) {
            tasks.push_back([&, id] {
                std::vector<std::any> inputs;
                inputs.reserve(g.deps(id).size());
                for (auto d : g.deps(id)) inputs.push_back(results[d]);
                try {
                    results[id] = g.run_node(id, inputs);
                } catch (const std::exception& e) {
                    std::lock_guard lk(err_m);
                    if (!failed || *failed > id) {
                        failed = id;
                        failure_msg = e.what();
                    }
                }
            });
        }
        ex.invoke(tasks);
        if (failed)
            throw worker_panic("node " + std::to_string(*failed) + " (" + g.name(*failed) +
                               ") failed: " + failure_msg);
        std::vector<task_graph::node_id> next;
        for (auto id : wave)
            for (auto c : consumers[id])
                if (--indeg[c] == 0) next.push_back(c);
        wave = std::move(next);
    }
    return results;
}

// ---------------------------------------------------------------------------
// efficiency factor and scaling measurements
// ---------------------------------------------------------------------------

/// Scalability metric: 100% means t*n stayed constant relative to the
/// baseline (k cores, t_k seconds); the baseline work sits in the numerator
/// so imperfect scaling lands below 100%.
inline double efficiency_factor(double t_n, int n, double t_k, int k) {
    if (t_n <= 0 || t_k <= 0 || n <= 0 || k <= 0)
        throw invalid_spec("efficiency factor needs positive times and counts");
    return (t_k * static_cast<double>(k)) / (t_n * static_cast<double>(n)) * 100.0;
}

struct bench_record {
    std::string op;
    std::int64_t order = 0;
    double density = 1.0;
    std::string domain;
    int workers = 1;
    double seconds = 0.0;
    double efficiency_pct = 100.0;
};

/// One benchmarkable operation: runs against an executor and returns a
/// fingerprint of its result so the series can verify determinism.
struct bench_op {
    std::string name;
    std::int64_t order = 0;
    double density = 1.0;
    std::string domain;
    std::function<std::uint64_t(executor&)> run;
};

struct bench_options {
    sched_mode mode = sched_mode::multidispatch;
    int repetitions = 3;
    std::int64_t spawn_cutoff = 256;
};

/// Runs `op` once per repetition at each worker count (ascending; the first
/// count is the efficiency baseline). All runs must produce the same result
/// fingerprint before any timing is reported; a mismatch is a hard failure.
inline std::vector<bench_record> scaling_series(const bench_op& op,
                                                const std::vector<int>& worker_counts,
                                                const bench_options& opts = {}) {
    if (worker_counts.empty() || !std::is_sorted(worker_counts.begin(), worker_counts.end()))
        throw invalid_spec("worker counts must be ascending and non-empty");
    if (opts.repetitions < 1) throw invalid_spec("repetitions must be positive");

    std::vector<bench_record> records;
    std::optional<std::uint64_t> expected;
    double baseline_work = 0.0;
    for (int workers : worker_counts) {
        task_engine engine({workers, opts.mode, false, opts.spawn_cutoff});
        std::vector<double> times;
        for (int rep = 0; rep < opts.repetitions; ++rep) {
            std::uint64_t fp = 0;
            auto t0 = std::chrono::steady_clock::now();
            if (opts.mode == sched_mode::multidispatch && workers > 1) {
                engine.run([&] { fp = op.run(engine); });
            } else {
                fp = op.run(engine);
            }
            auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
            if (expected && fp != *expected)
                throw result_mismatch("result fingerprint diverged at " +
                                      std::to_string(workers) + " workers");
            if (!expected) expected = fp;
        }
        std::sort(times.begin(), times.end());
        const std::size_t mid = times.size() / 2;
        const double median = times.size() % 2 ? times[mid]
                                               : 0.5 * (times[mid - 1] + times[mid]);
        bench_record rec{op.name, op.order, op.density, op.domain, workers, median, 100.0};
        if (records.empty())
            baseline_work = median * workers;
        else
            rec.efficiency_pct = baseline_work / (median * workers) * 100.0;
        records.push_back(std::move(rec));
    }
    return records;
}

inline void write_csv(const std::vector<bench_record>& records, std::ostream& os) {
    os << "op,order,density,domain,workers,seconds,efficiency_pct\n";
    char buf[64];
    for (const auto& r : records) {
        os << r.op << ',' << r.order << ',';
        std::snprintf(buf, sizeof(buf), "%g", r.density);
        os << buf << ',' << r.domain << ',' << r.workers << ',';
        std::snprintf(buf, sizeof(buf), "%.6f", r.seconds);
        os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.2f", r.efficiency_pct);
        os << buf << '\n';
    }
}

} // namespace qmat
