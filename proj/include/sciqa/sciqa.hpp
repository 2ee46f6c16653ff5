/*
 * Copyright 2026 The SciQA Authors.
 *
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

#ifndef SCIQA_SCIQA_HPP_
#define SCIQA_SCIQA_HPP_

#include "sciqa/corpus.hpp"
#include "sciqa/error.hpp"
#include "sciqa/eval.hpp"
#include "sciqa/persistence.hpp"
#include "sciqa/pipeline.hpp"
#include "sciqa/reader.hpp"
#include "sciqa/retriever.hpp"
#include "sciqa/service.hpp"
#include "sciqa/squad.hpp"
#include "sciqa/text.hpp"

#endif  // SCIQA_SCIQA_HPP_
