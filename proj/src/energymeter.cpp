#include "ragwatt/energymeter.hpp"

#include <algorithm>
#include <fstream>

#ifdef RAGWATT_WITH_NVML
#include <nvml.h>
#endif

namespace ragwatt {

using nlohmann::json;

std::string to_string(EnergyDomain d) {
    switch (d) {
        case EnergyDomain::cpu_package: return "cpu_package";
        case EnergyDomain::dram: return "dram";
        case EnergyDomain::gpu: return "gpu";
    }
    return "unknown";
}

EnergyDomain energy_domain_from_string(const std::string& s) {
    if (s == "cpu_package") return EnergyDomain::cpu_package;
    if (s == "dram") return EnergyDomain::dram;
    if (s == "gpu") return EnergyDomain::gpu;
    throw ConfigError("unknown energy domain '" + s + "'");
}

int64_t monotonic_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

json EnergyReading::to_json() const {
    json joules_j = json::object();
    for (const auto& [domain, value] : joules) joules_j[to_string(domain)] = value;
    json flags = json::array();
    if (counter_wrapped) flags.push_back("counter_wrapped");
    if (domain_unavailable) flags.push_back("domain_unavailable");
    if (simulated) flags.push_back("simulated");
    return json{{"window_name", window_name}, {"joules", joules_j},       {"total_joules", total_joules},
                {"duration_s", duration_s},   {"sample_count", sample_count}, {"flags", flags}};
}

EnergyReading EnergyReading::from_json(const json& j) {
    EnergyReading r;
    r.window_name = j.value("window_name", "");
    if (j.contains("joules"))
        for (const auto& [key, value] : j["joules"].items())
            r.joules[energy_domain_from_string(key)] = value.get<double>();
    r.total_joules = j.value("total_joules", 0.0);
    r.duration_s = j.value("duration_s", 0.0);
    r.sample_count = j.value("sample_count", 0);
    if (j.contains("flags"))
        for (const auto& f : j["flags"]) {
            const std::string name = f.get<std::string>();
            if (name == "counter_wrapped") r.counter_wrapped = true;
            if (name == "domain_unavailable") r.domain_unavailable = true;
            if (name == "simulated") r.simulated = true;
        }
    return r;
}

std::optional<EnergyReading> Meter::take_aborted_reading() {
    std::lock_guard lock(aborted_mutex_);
    auto out = std::move(aborted_);
    aborted_.reset();
    return out;
}

EnergyReading reduce_samples(const std::vector<EnergySample>& samples,
                             const std::vector<MeterChannel>& channels, const std::string& window_name,
                             bool simulated) {
    EnergyReading reading;
    reading.window_name = window_name;
    reading.simulated = simulated;
    reading.sample_count = static_cast<int>(samples.size());
    if (samples.size() < 2) throw Error("window produced fewer than 2 samples");

    const double duration_ns = static_cast<double>(samples.back().t_ns - samples.front().t_ns);
    reading.duration_s = std::max(duration_ns, 1.0) / 1e9;

    if (channels.empty()) reading.domain_unavailable = true;
    for (size_t ch = 0; ch < channels.size(); ++ch) {
        uint64_t total_uj = 0;
        for (size_t i = 1; i < samples.size(); ++i) {
            const uint64_t prev = samples[i - 1].counters_uj[ch];
            const uint64_t cur = samples[i].counters_uj[ch];
            if (cur < prev) reading.counter_wrapped = true;
            total_uj += counter_delta(prev, cur, channels[ch].max_range_uj);
        }
        reading.joules[channels[ch].domain] += static_cast<double>(total_uj) / 1e6;
    }
    for (const auto& [domain, value] : reading.joules) reading.total_joules += value;
    return reading;
}

MeterSession::MeterSession(Meter& meter, std::string window_name)
    : meter_(meter), window_name_(std::move(window_name)) {
    bool expected = false;
    if (!meter_.busy_.compare_exchange_strong(expected, true))
        throw Error("a measured window is already open on this meter");
    open_ = true;
}

MeterSession::~MeterSession() {
    if (open_) {
        stop_sampler();
        meter_.busy_.store(false);
        open_ = false;
    }
}

void MeterSession::push_sample() {
    EnergySample s = meter_.sample();
    std::lock_guard lock(mutex_);
    if (!samples_.empty() && s.t_ns <= samples_.back().t_ns) s.t_ns = samples_.back().t_ns + 1;
    samples_.push_back(std::move(s));
}

void MeterSession::start() {
    push_sample();
    sampler_ = std::thread([this] {
        std::unique_lock lock(mutex_);
        while (!cv_.wait_for(lock, meter_.sampling_interval, [this] { return stop_requested_; })) {
            lock.unlock();
            push_sample();
            lock.lock();
        }
    });
}

void MeterSession::stop_sampler() {
    if (!sampler_.joinable()) return;
    {
        std::lock_guard lock(mutex_);
        stop_requested_ = true;
    }
    cv_.notify_all();
    sampler_.join();
}

EnergyReading MeterSession::finish() {
    stop_sampler();
    push_sample();
    meter_.busy_.store(false);
    open_ = false;
    return reduce_samples(samples_, meter_.channels(), window_name_, meter_.simulated());
}

EnergyReading MeterSession::stop() { return finish(); }

void MeterSession::abort() {
    EnergyReading partial = finish();
    std::lock_guard lock(meter_.aborted_mutex_);
    meter_.aborted_ = std::move(partial);
}

SimulatedMeter::SimulatedMeter(std::map<EnergyDomain, double> watts, uint64_t max_range_uj)
    : t0_ns_(monotonic_ns()) {
    if (watts.empty()) throw ConfigError("simulated meter needs at least one power_watts domain");
    const uint64_t range = max_range_uj == 0 ? UINT64_MAX : max_range_uj;
    for (const auto& [domain, w] : watts) {
        if (w <= 0) throw ConfigError("simulated watts must be positive for " + to_string(domain));
        channels_.push_back({"sim-" + to_string(domain), domain, range});
        watts_.push_back(w);
    }
}

EnergySample SimulatedMeter::sample() {
    EnergySample s;
    s.t_ns = monotonic_ns();
    const double elapsed_s = static_cast<double>(s.t_ns - t0_ns_) / 1e9;
    s.counters_uj.reserve(channels_.size());
    for (size_t i = 0; i < channels_.size(); ++i) {
        const double uj = elapsed_s * watts_[i] * 1e6;
        uint64_t counter = static_cast<uint64_t>(uj);
        if (channels_[i].max_range_uj != UINT64_MAX) counter %= channels_[i].max_range_uj;
        s.counters_uj.push_back(counter);
    }
    return s;
}

namespace {

std::optional<std::string> read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) return std::nullopt;
    std::string s;
    std::getline(in, s);
    return s;
}

std::optional<uint64_t> read_counter_file(const std::filesystem::path& p) {
    auto text = read_text_file(p);
    if (!text) return std::nullopt;
    try {
        return std::stoull(*text);
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace

PowercapMeter::PowercapMeter(std::filesystem::path root) {
    std::error_code ec;
    std::vector<std::filesystem::path> zones;
    for (const auto& entry : std::filesystem::directory_iterator(root, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("intel-rapl:", 0) == 0) zones.push_back(entry.path());
        // zone directories can nest one level (intel-rapl:0:0)
        std::error_code ec2;
        for (const auto& sub : std::filesystem::directory_iterator(entry.path(), ec2)) {
            const std::string sub_name = sub.path().filename().string();
            if (sub_name.rfind("intel-rapl:", 0) == 0) zones.push_back(sub.path());
        }
    }
    std::sort(zones.begin(), zones.end());

    for (const auto& zone : zones) {
        auto zone_name = read_text_file(zone / "name");
        if (!zone_name) continue;
        EnergyDomain domain;
        if (zone_name->rfind("package", 0) == 0)
            domain = EnergyDomain::cpu_package;
        else if (*zone_name == "dram")
            domain = EnergyDomain::dram;
        else
            continue;
        auto range = read_counter_file(zone / "max_energy_range_uj");
        auto energy = read_counter_file(zone / "energy_uj");
        if (!range || !energy) continue;  // zone present but unreadable: skip, not fatal
        channels_.push_back({zone.filename().string() + ":" + *zone_name, domain, *range});
        energy_files_.push_back(zone / "energy_uj");
    }
}

EnergySample PowercapMeter::sample() {
    EnergySample s;
    s.t_ns = monotonic_ns();
    s.counters_uj.reserve(energy_files_.size());
    for (const auto& file : energy_files_) {
        auto v = read_counter_file(file);
        if (!v) throw IoError("powercap counter became unreadable: " + file.string());
        s.counters_uj.push_back(*v);
    }
    return s;
}

#ifdef RAGWATT_WITH_NVML
GpuMeter::GpuMeter() {
    if (nvmlInit_v2() != NVML_SUCCESS) throw MeterUnavailable("NVML initialization failed");
    if (nvmlDeviceGetCount_v2(&device_count_) != NVML_SUCCESS) device_count_ = 0;
    for (unsigned i = 0; i < device_count_; ++i) {
        nvmlDevice_t dev;
        unsigned long long mj = 0;
        if (nvmlDeviceGetHandleByIndex_v2(i, &dev) != NVML_SUCCESS) continue;
        if (nvmlDeviceGetTotalEnergyConsumption(dev, &mj) != NVML_SUCCESS) continue;
        channels_.push_back({"nvml-" + std::to_string(i), EnergyDomain::gpu, UINT64_MAX});
    }
    if (channels_.empty()) {
        nvmlShutdown();
        throw MeterUnavailable("no GPU exposes a total-energy counter");
    }
}

GpuMeter::~GpuMeter() { nvmlShutdown(); }

EnergySample GpuMeter::sample() {
    EnergySample s;
    s.t_ns = monotonic_ns();
    for (unsigned i = 0; i < device_count_; ++i) {
        nvmlDevice_t dev;
        unsigned long long mj = 0;
        if (nvmlDeviceGetHandleByIndex_v2(i, &dev) == NVML_SUCCESS)
            nvmlDeviceGetTotalEnergyConsumption(dev, &mj);
        s.counters_uj.push_back(static_cast<uint64_t>(mj) * 1000);  // mJ -> uJ
    }
    return s;
}
#endif

CompositeMeter::CompositeMeter(std::vector<std::unique_ptr<Meter>> children)
    : children_(std::move(children)) {
    for (const auto& child : children_)
        for (const auto& ch : child->channels()) channels_.push_back(ch);
}

EnergySample CompositeMeter::sample() {
    EnergySample s;
    s.t_ns = monotonic_ns();
    for (auto& child : children_) {
        EnergySample cs = child->sample();
        s.counters_uj.insert(s.counters_uj.end(), cs.counters_uj.begin(), cs.counters_uj.end());
    }
    return s;
}

bool CompositeMeter::simulated() const {
    for (const auto& child : children_)
        if (!child->simulated()) return false;
    return true;
}

std::unique_ptr<Meter> open_meter(const MeterConfig& config) {
    std::unique_ptr<Meter> meter;
    if (config.kind == "simulated") {
        std::map<EnergyDomain, double> watts;
        for (const auto& [name, w] : config.power_watts) watts[energy_domain_from_string(name)] = w;
        meter = std::make_unique<SimulatedMeter>(std::move(watts), config.sim_max_range_uj);
    } else if (config.kind == "powercap") {
        meter = std::make_unique<PowercapMeter>(config.powercap_root);
        if (!meter->available())
            throw MeterUnavailable("no readable powercap energy domain under " + config.powercap_root);
    } else if (config.kind == "gpu") {
#ifdef RAGWATT_WITH_NVML
        meter = std::make_unique<GpuMeter>();
#else
        throw MeterUnavailable("built without NVML support");
#endif
    } else if (config.kind == "null") {
        meter = std::make_unique<NullMeter>();
    } else if (config.kind == "composite") {
        if (config.children.empty()) throw ConfigError("composite meter needs children");
        std::vector<std::unique_ptr<Meter>> children;
        for (const auto& child : config.children) children.push_back(open_meter(child));
        meter = std::make_unique<CompositeMeter>(std::move(children));
        if (!meter->available()) throw MeterUnavailable("composite meter has no channels");
    } else {
        throw ConfigError("unknown meter kind '" + config.kind + "'");
    }
    meter->sampling_interval = std::chrono::milliseconds(config.sampling_interval_ms);
    return meter;
}

}  // namespace ragwatt
