/*
 * Copyright 2026 The jtsne Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "jtsne/net/token.h"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <cstdlib>

#include "absl/strings/str_cat.h"
#include "jtsne/common/bytes.h"

namespace jtsne::net {

namespace {

std::string RandomHex(size_t bytes) {
  std::string raw(bytes, '\0');
  if (RAND_bytes(reinterpret_cast<unsigned char*>(raw.data()),
                 static_cast<int>(bytes)) != 1) {
    std::abort();
  }
  return HexEncode(raw);
}

}  // namespace

std::string NewTokenKey() { return RandomHex(32); }
std::string NewTaskId() { return RandomHex(16); }

std::string MintToken(std::string_view key_hex, std::string_view task_id,
                      std::string_view viewer, std::string_view kind) {
  const std::string key = HexDecode(key_hex).value_or(std::string(key_hex));
  const std::string msg = absl::StrCat(std::string(task_id), "\n",
                                       std::string(viewer), "\n",
                                       std::string(kind));
  unsigned char mac[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
       reinterpret_cast<const unsigned char*>(msg.data()), msg.size(), mac,
       &len);
  return HexEncode(std::string_view(reinterpret_cast<const char*>(mac), len));
}

bool VerifyToken(std::string_view key_hex, std::string_view token,
                 std::string_view task_id, std::string_view viewer,
                 std::string_view kind) {
  const std::string want = MintToken(key_hex, task_id, viewer, kind);
  return token.size() == want.size() &&
         CRYPTO_memcmp(token.data(), want.data(), want.size()) == 0;
}

}  // namespace jtsne::net
