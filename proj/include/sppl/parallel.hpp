#pragma once

#include <deque>
#include <future>
#include <vector>

namespace sppl {

/// Runs work(item, index) over items with at most `window` calls in flight,
/// then hands results to commit(result, index) strictly in item order. An
/// exception from work is rethrown at that item's commit point; items committed
/// before it stay committed.
template <typename T, typename Work, typename Commit>
void ordered_parallel_pipeline(const std::vector<T>& items, int window, Work work, Commit commit) {
    using Result = std::invoke_result_t<Work, const T&, size_t>;
    if (window < 1) {
        window = 1;
    }
    const size_t n = items.size();
    std::deque<std::future<Result>> inflight;
    size_t launched = 0;
    for (size_t next = 0; next < n; ++next) {
        while (launched < n && inflight.size() < static_cast<size_t>(window)) {
            const size_t idx = launched++;
            inflight.emplace_back(std::async(std::launch::async,
                                             [&work, &items, idx] { return work(items[idx], idx); }));
        }
        Result result = inflight.front().get();
        inflight.pop_front();
        commit(std::move(result), next);
    }
}

template <typename T, typename Work>
auto ordered_parallel_map(const std::vector<T>& items, int window, Work work) {
    using Result = std::invoke_result_t<Work, const T&, size_t>;
    std::vector<Result> results;
    results.reserve(items.size());
    ordered_parallel_pipeline(items, window, work,
                              [&](Result&& r, size_t) { results.push_back(std::move(r)); });
    return results;
}

} // namespace sppl
