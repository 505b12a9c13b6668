// Copyright 2026 The robner Authors.
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

// Generators for the synthetic NER corpus and the sample knowledge corpus.

#ifndef ROBNER_SYNTHETIC_H_
#define ROBNER_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "robner/corpus.h"
#include "robner/sparse.h"

namespace robner {

struct EntityForm {
  std::string type;
  std::string surface;  // space-separated words
};

// The fixed inventory of 50 entity surface forms (PER, LOC and ORG).
const std::vector<EntityForm>& SyntheticEntities();

// Template sentences filled with entity forms; many templates accept any
// type, so the entity words themselves carry the type. Ids are "s<k>".
Dataset GenerateNerCorpus(std::size_t sentences, std::uint64_t seed);

// A few encyclopedic sentences per entity form, titled with the entity and
// anchoring every mention of another inventory entity.
std::vector<IndexedUnit> GenerateKnowledge(std::uint64_t seed);

}  // namespace robner

#endif  // ROBNER_SYNTHETIC_H_
