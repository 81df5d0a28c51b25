#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ragwatt/errors.hpp"

namespace ragwatt {

enum class EnergyDomain { cpu_package, dram, gpu };
std::string to_string(EnergyDomain d);
EnergyDomain energy_domain_from_string(const std::string& s);

/// One cumulative counter source (a RAPL zone, a simulated domain, ...).
struct MeterChannel {
    std::string label;
    EnergyDomain domain;
    uint64_t max_range_uj = 0;  // counter wraps modulo this
};

/// Raw counter snapshot, parallel to the meter's channel list.
struct EnergySample {
    int64_t t_ns = 0;  // monotonic
    std::vector<uint64_t> counters_uj;
};

struct EnergyReading {
    std::string window_name;
    std::map<EnergyDomain, double> joules;
    double total_joules = 0.0;
    double duration_s = 0.0;
    int sample_count = 0;
    bool counter_wrapped = false;
    bool domain_unavailable = false;
    bool simulated = false;

    nlohmann::json to_json() const;
    static EnergyReading from_json(const nlohmann::json& j);
};

/// Difference of two cumulative counter values that wrap modulo max_range.
/// Valid when at most one wrap happened between the two reads.
inline uint64_t counter_delta(uint64_t a, uint64_t b, uint64_t max_range) {
    if (b >= a) return b - a;
    return (max_range - a) + b;
}

int64_t monotonic_ns();

class Meter {
  public:
    virtual ~Meter() = default;
    virtual const std::vector<MeterChannel>& channels() const = 0;
    virtual EnergySample sample() = 0;
    virtual std::string kind() const = 0;
    virtual bool simulated() const { return false; }

    bool available() const { return !channels().empty(); }

    std::chrono::milliseconds sampling_interval{100};

    /// Partial reading from the last window whose action threw.
    std::optional<EnergyReading> take_aborted_reading();

  private:
    friend class MeterSession;
    std::atomic<bool> busy_{false};
    std::mutex aborted_mutex_;
    std::optional<EnergyReading> aborted_;
};

/// Folds a sample series into a reading: per channel, joules are the sum of
/// consecutive wrap-aware deltas; channels then aggregate per domain.
EnergyReading reduce_samples(const std::vector<EnergySample>& samples,
                             const std::vector<MeterChannel>& channels, const std::string& window_name,
                             bool simulated);

/// One measurement window: endpoint samples plus a background sampler at the
/// meter's interval. Exactly one session may be open on a meter at a time.
class MeterSession {
  public:
    MeterSession(Meter& meter, std::string window_name);
    ~MeterSession();

    MeterSession(const MeterSession&) = delete;
    MeterSession& operator=(const MeterSession&) = delete;

    void start();
    /// Ends the window and returns its reading.
    EnergyReading stop();
    /// Ends the window after a failed action; the partial reading is stashed
    /// on the meter for error context.
    void abort();

  private:
    void push_sample();
    void stop_sampler();
    EnergyReading finish();

    Meter& meter_;
    std::string window_name_;
    std::vector<EnergySample> samples_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stop_requested_ = false;
    bool open_ = false;
    std::thread sampler_;
};

/// Runs `action` inside a named window. Returns the action result paired with
/// the window's EnergyReading (reading only, for void actions). If the action
/// throws, the session is closed, the partial reading is attached to the meter
/// (take_aborted_reading) and the error propagates.
template <class F>
auto measure_window(Meter& meter, std::string window_name, F&& action) {
    MeterSession session(meter, std::move(window_name));
    session.start();
    if constexpr (std::is_void_v<std::invoke_result_t<F&>>) {
        try {
            action();
        } catch (...) {
            session.abort();
            throw;
        }
        return session.stop();
    } else {
        try {
            auto result = action();
            auto reading = session.stop();
            return std::make_pair(std::move(result), std::move(reading));
        } catch (...) {
            session.abort();
            throw;
        }
    }
}

/// Constant-power meter for tests and offline runs: each domain's counter
/// advances at the configured watts, modulo max_range when one is set.
class SimulatedMeter final : public Meter {
  public:
    explicit SimulatedMeter(std::map<EnergyDomain, double> watts, uint64_t max_range_uj = 0);
    const std::vector<MeterChannel>& channels() const override { return channels_; }
    EnergySample sample() override;
    std::string kind() const override { return "simulated"; }
    bool simulated() const override { return true; }

  private:
    std::vector<MeterChannel> channels_;
    std::vector<double> watts_;
    int64_t t0_ns_;
};

/// Reads Linux powercap sysfs counters (energy_uj / max_energy_range_uj).
/// Zone names map as: package* -> cpu_package, dram -> dram; other zones are
/// skipped. The root is injectable so tests can point at a fake tree.
class PowercapMeter final : public Meter {
  public:
    explicit PowercapMeter(std::filesystem::path root = "/sys/class/powercap");
    const std::vector<MeterChannel>& channels() const override { return channels_; }
    EnergySample sample() override;
    std::string kind() const override { return "powercap"; }

  private:
    std::vector<MeterChannel> channels_;
    std::vector<std::filesystem::path> energy_files_;
};

#ifdef RAGWATT_WITH_NVML
/// NVML total-energy counter (reported in mJ, stored as uJ).
class GpuMeter final : public Meter {
  public:
    GpuMeter();
    ~GpuMeter() override;
    const std::vector<MeterChannel>& channels() const override { return channels_; }
    EnergySample sample() override;
    std::string kind() const override { return "gpu_mgmt"; }

  private:
    std::vector<MeterChannel> channels_;
    unsigned device_count_ = 0;
};
#endif

/// No-domain meter for --allow-no-energy runs; readings carry the
/// domain_unavailable flag and zero joules.
class NullMeter final : public Meter {
  public:
    const std::vector<MeterChannel>& channels() const override { return channels_; }
    EnergySample sample() override { return {monotonic_ns(), {}}; }
    std::string kind() const override { return "null"; }

  private:
    std::vector<MeterChannel> channels_;
};

class CompositeMeter final : public Meter {
  public:
    explicit CompositeMeter(std::vector<std::unique_ptr<Meter>> children);
    const std::vector<MeterChannel>& channels() const override { return channels_; }
    EnergySample sample() override;
    std::string kind() const override { return "composite"; }
    bool simulated() const override;

  private:
    std::vector<std::unique_ptr<Meter>> children_;
    std::vector<MeterChannel> channels_;
};

struct MeterConfig {
    std::string kind = "simulated";  // powercap | gpu | simulated | composite | null
    int sampling_interval_ms = 100;
    std::map<std::string, double> power_watts;  // simulated: domain -> watts
    uint64_t sim_max_range_uj = 0;              // simulated: 0 = never wraps
    std::string powercap_root = "/sys/class/powercap";
    std::vector<MeterConfig> children;
};

/// Probes and opens the configured meter. Throws MeterUnavailable when no
/// energy domain can be read and the kind is not simulated/null.
std::unique_ptr<Meter> open_meter(const MeterConfig& config);

}  // namespace ragwatt
