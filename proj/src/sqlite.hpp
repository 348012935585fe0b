#pragma once

// Thin RAII layer over the SQLite C API, internal to the library.

#include <sqlite3.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "coci/error.hpp"

namespace coci::sqlite {

class Statement {
 public:
  Statement() = default;
  Statement(sqlite3* db, std::string_view sql, ErrorKind failure) : failure_(failure) {
    if (sqlite3_prepare_v3(db, sql.data(), static_cast<int>(sql.size()), SQLITE_PREPARE_PERSISTENT, &stmt_, nullptr) !=
        SQLITE_OK)
      throw Error(failure, std::string(sqlite3_errmsg(db)) + " in: " + std::string(sql));
  }
  Statement(Statement&& o) noexcept : stmt_(std::exchange(o.stmt_, nullptr)), failure_(o.failure_) {}
  Statement& operator=(Statement&& o) noexcept {
    if (this != &o) {
      sqlite3_finalize(stmt_);
      stmt_ = std::exchange(o.stmt_, nullptr);
      failure_ = o.failure_;
    }
    return *this;
  }
  ~Statement() { sqlite3_finalize(stmt_); }

  Statement& reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
    return *this;
  }
  Statement& bind(int index, std::string_view text) {
    check(sqlite3_bind_text(stmt_, index, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind(int index, std::int64_t value) {
    check(sqlite3_bind_int64(stmt_, index, value));
    return *this;
  }
  Statement& bind_null(int index) {
    check(sqlite3_bind_null(stmt_, index));
    return *this;
  }

  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(failure_, sqlite3_errmsg(sqlite3_db_handle(stmt_)));
  }
  void run() {
    while (step()) {
    }
  }

  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::string_view text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string_view(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string_view();
  }

 private:
  void check(int rc) const {
    if (rc != SQLITE_OK) throw Error(failure_, sqlite3_errmsg(sqlite3_db_handle(stmt_)));
  }

  sqlite3_stmt* stmt_ = nullptr;
  ErrorKind failure_ = ErrorKind::StoreWriteFailure;
};

class Database {
 public:
  Database() = default;
  Database(const std::filesystem::path& path, int flags, ErrorKind failure) : failure_(failure) {
    if (sqlite3_open_v2(path.c_str(), &db_, flags | SQLITE_OPEN_NOMUTEX, nullptr) != SQLITE_OK) {
      const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      db_ = nullptr;
      throw Error(failure, path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 10000);
  }
  Database(Database&& o) noexcept : db_(std::exchange(o.db_, nullptr)), failure_(o.failure_) {}
  Database& operator=(Database&& o) noexcept {
    if (this != &o) {
      sqlite3_close_v2(db_);
      db_ = std::exchange(o.db_, nullptr);
      failure_ = o.failure_;
    }
    return *this;
  }
  ~Database() { sqlite3_close_v2(db_); }

  void exec(std::string_view sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, std::string(sql).c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error(failure_, msg);
    }
  }
  Statement prepare(std::string_view sql) const { return Statement(db_, sql, failure_); }
  int changes() const { return sqlite3_changes(db_); }
  bool in_transaction() const { return sqlite3_get_autocommit(db_) == 0; }

 private:
  sqlite3* db_ = nullptr;
  ErrorKind failure_ = ErrorKind::StoreWriteFailure;
};

}  // namespace coci::sqlite
