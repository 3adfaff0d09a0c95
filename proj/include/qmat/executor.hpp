#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace qmat {

/// Execution interface the algorithm modules fork their independent
/// sub-computations through. Algorithms stay pure: tasks close over
/// immutable inputs and write to caller-owned result slots, so any
/// interleaving produces identical results. The base class is the serial
/// schedule (tasks run in order), which doubles as the replay oracle for
/// determinism tests.
class executor {
public:
    virtual ~executor() = default;

    virtual int worker_count() const noexcept { return 1; }

    /// Runs independent tasks to completion. May be called from inside a
    /// running task (nested fork/join).
    virtual void invoke(std::span<std::function<void()>> tasks) {
        for (auto& t : tasks) t();
    }

    /// Blocks smaller than the cutoff are not worth a dispatch; they run
    /// inline on whichever worker asks.
    std::int64_t spawn_cutoff = 256;

    bool should_spawn(std::int64_t order) const noexcept {
        return worker_count() > 1 && order >= spawn_cutoff;
    }
};

inline executor& serial_executor() {
    static executor e;
    return e;
}

} // namespace qmat
