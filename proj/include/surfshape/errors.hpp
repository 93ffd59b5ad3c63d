/*
 * surfshape - functional shape analysis for corresponded triangulated surfaces.
 *
 * Copyright 2026 The surfshape Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace surfshape {

/// Input that violates a documented precondition (bad file, mismatched
/// correspondence, invalid option). The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a result (singular system,
/// degenerate configuration). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace surfshape
