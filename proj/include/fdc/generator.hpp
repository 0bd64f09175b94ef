#ifndef FDC_GENERATOR_HPP
#define FDC_GENERATOR_HPP

#include <coroutine>
#include <exception>
#include <iterator>
#include <optional>
#include <utility>

namespace fdc {

// Single-pass lazy sequence backed by a coroutine. Values are produced on
// demand; the coroutine frame is destroyed with the generator.
template <typename T> class Generator {
  public:
    struct promise_type {
        std::optional<T> current;
        std::exception_ptr error;

        Generator get_return_object() {
            return Generator(
                std::coroutine_handle<promise_type>::from_promise(*this));
        }
        std::suspend_always initial_suspend() noexcept { return {}; }
        std::suspend_always final_suspend() noexcept { return {}; }
        template <typename U> std::suspend_always yield_value(U&& v) {
            current.emplace(std::forward<U>(v));
            return {};
        }
        void return_void() {}
        void unhandled_exception() { error = std::current_exception(); }
    };

    using Handle = std::coroutine_handle<promise_type>;

    Generator() = default;
    explicit Generator(Handle h) : handle_(h) {}
    Generator(const Generator&) = delete;
    Generator& operator=(const Generator&) = delete;
    Generator(Generator&& other) noexcept
        : handle_(std::exchange(other.handle_, Handle{})) {}
    Generator& operator=(Generator&& other) noexcept {
        if (this != &other) {
            reset();
            handle_ = std::exchange(other.handle_, Handle{});
        }
        return *this;
    }
    ~Generator() { reset(); }

    // Advances to the next element; nullopt once exhausted.
    std::optional<T> next() {
        if (!handle_ || handle_.done())
            return std::nullopt;
        handle_.promise().current.reset();
        handle_.resume();
        if (handle_.promise().error)
            std::rethrow_exception(std::exchange(handle_.promise().error, {}));
        if (handle_.done())
            return std::nullopt;
        return std::move(handle_.promise().current);
    }

    class iterator {
      public:
        using iterator_category = std::input_iterator_tag;
        using value_type = T;
        using difference_type = std::ptrdiff_t;

        iterator() = default;
        explicit iterator(Generator* g) : gen_(g) { advance(); }

        const T& operator*() const { return *value_; }
        iterator& operator++() {
            advance();
            return *this;
        }
        void operator++(int) { advance(); }
        bool operator==(std::default_sentinel_t) const { return !value_; }

      private:
        void advance() { value_ = gen_->next(); }
        Generator* gen_ = nullptr;
        std::optional<T> value_;
    };

    iterator begin() { return iterator(this); }
    std::default_sentinel_t end() { return {}; }

  private:
    void reset() {
        if (handle_)
            handle_.destroy();
        handle_ = {};
    }
    Handle handle_{};
};

} // namespace fdc

#endif
