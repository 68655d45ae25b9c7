#include "hgmem/providers.hpp"

#include "hgmem/errors.hpp"

namespace hgmem {

void CallLog::append(CallRecord record) {
  std::lock_guard lock(mutex_);
  records_.push_back(std::move(record));
}

std::size_t CallLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<CallRecord> CallLog::entries() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<CallRecord> CallLog::entries_since(std::size_t position) const {
  std::lock_guard lock(mutex_);
  if (position >= records_.size()) return {};
  return {records_.begin() + static_cast<std::ptrdiff_t>(position), records_.end()};
}

std::size_t CallLog::count(std::string_view provider, std::size_t since) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (std::size_t i = since; i < records_.size(); ++i) {
    if (records_[i].provider == provider) ++n;
  }
  return n;
}

UsageSummary record_usage(std::span<const CallRecord> records, std::size_t query_count) {
  UsageSummary out;
  std::chrono::microseconds total{0};
  for (const auto& r : records) {
    out.input_tokens += r.input_tokens;
    out.output_tokens += r.output_tokens;
    total += r.elapsed;
    ++out.calls;
  }
  if (query_count == 0) return UsageSummary{};
  const auto q = static_cast<double>(query_count);
  out.tokens_per_query = static_cast<double>(out.input_tokens + out.output_tokens) / q;
  out.mean_latency_seconds = static_cast<double>(total.count()) / 1e6 / q;
  return out;
}

void ProviderBundle::require_complete() const {
  if (!embedder) throw ValidationError("provider bundle: missing embedder");
  if (!discriminator) throw ValidationError("provider bundle: missing discriminator");
  if (!summarizer) throw ValidationError("provider bundle: missing summarizer");
  if (!relation_scorer) throw ValidationError("provider bundle: missing relation scorer");
  if (!relevance_scorer) throw ValidationError("provider bundle: missing relevance scorer");
  if (!call_log) throw ValidationError("provider bundle: missing call log");
}

std::string linearize_buffer(std::span<const EventNode> buffer) {
  std::string out;
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i);
    out += ". ";
    out += buffer[i].speaker;
    out += ": ";
    out += buffer[i].text;
  }
  return out;
}

}  // namespace hgmem
