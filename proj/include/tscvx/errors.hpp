/*
 Copyright 2026 The tscvx Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef TSCVX_ERRORS_HPP
#define TSCVX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tscvx {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TSCVX_DEFINE_ERROR(Name)            \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

TSCVX_DEFINE_ERROR(NonPositiveMass);
TSCVX_DEFINE_ERROR(IntegrationFailure);
TSCVX_DEFINE_ERROR(IllConditioned);
TSCVX_DEFINE_ERROR(NumericalError);
TSCVX_DEFINE_ERROR(MalformedProgram);
TSCVX_DEFINE_ERROR(NotOptimal);
TSCVX_DEFINE_ERROR(InconsistentCatalog);
TSCVX_DEFINE_ERROR(SubproblemFailure);
TSCVX_DEFINE_ERROR(NotConverged);
TSCVX_DEFINE_ERROR(ShapeMismatch);
TSCVX_DEFINE_ERROR(EmptyDataset);
TSCVX_DEFINE_ERROR(DegenerateCovariance);
TSCVX_DEFINE_ERROR(PredictorFailure);
TSCVX_DEFINE_ERROR(FormatError);

#undef TSCVX_DEFINE_ERROR

}  // namespace tscvx

#endif  // TSCVX_ERRORS_HPP
