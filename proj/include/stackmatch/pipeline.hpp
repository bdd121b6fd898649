// Copyright 2026-present the stackmatch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>

#include "stackmatch/index_store.hpp"

namespace stackmatch {

/// corpus -> dictionary + bags (one pass, doc order) -> model -> vectors ->
/// index. Throws EmptyCorpus when the corpus has no documents.
IndexBundle build_bundle(Corpus corpus, Execution exec = Execution::Parallel);

/// Reads a row file and builds its bundle.
IndexBundle build_bundle_from_rows(const std::filesystem::path& rows,
                                   Execution exec = Execution::Parallel);

}  // namespace stackmatch
