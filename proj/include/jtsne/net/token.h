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

#ifndef JTSNE_NET_TOKEN_H_
#define JTSNE_NET_TOKEN_H_

#include <string>
#include <string_view>

namespace jtsne::net {

// Random 32-byte key, hex encoded.
std::string NewTokenKey();
// HMAC-SHA256 over task, viewer and kind, hex encoded.
std::string MintToken(std::string_view key_hex, std::string_view task_id,
                      std::string_view viewer, std::string_view kind);
bool VerifyToken(std::string_view key_hex, std::string_view token,
                 std::string_view task_id, std::string_view viewer,
                 std::string_view kind);
// 128 random bits as 32 hex characters.
std::string NewTaskId();

}  // namespace jtsne::net

#endif  // JTSNE_NET_TOKEN_H_
